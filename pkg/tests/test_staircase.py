import numpy as np
import pytest

from fibercm.staircase import (
    StaircaseDecoder,
    StaircaseEncoder,
    StaircaseParams,
    decode_stream,
    error_floor_estimate,
    minimal_stall_pattern,
    net_coding_gain,
    read_block_stream,
    simulate_bsc,
    write_block_stream,
)


@pytest.fixture(scope="module")
def toy():
    return StaircaseParams.create(16, 2)


def _encode_stream(params, rng, nblocks):
    enc = StaircaseEncoder(params)
    return np.stack(
        [
            enc.encode_next(
                rng.integers(0, 2, (params.block_size, params.info_cols),
                             dtype=np.uint8)
            )
            for _ in range(nblocks)
        ]
    )


def test_stream_invariant(toy):
    """Rows of [B_{i-1}^T B_i] must be component codewords, B_0 = 0."""
    rng = np.random.default_rng(0)
    blocks = _encode_stream(toy, rng, 12)
    prev = np.zeros((16, 16), dtype=np.uint8)
    for blk in blocks:
        for j in range(16):
            word = np.concatenate([prev[:, j], blk[j]])
            assert not toy.code.syndromes(word).any()
        prev = blk


def test_zero_info_gives_zero_block(toy):
    enc = StaircaseEncoder(toy)
    blk = enc.encode_next(np.zeros((16, toy.info_cols), dtype=np.uint8))
    assert not blk.any()


def test_rate(toy):
    assert toy.rate == 1 - toy.parity_bits / 16
    assert StaircaseParams.create(120, 4).rate == pytest.approx(11 / 15)
    assert StaircaseParams.g709().rate == pytest.approx(239 / 255)


def test_parity_must_fit():
    # m=8 with t=2 needs 10 parity bits, more than one block column set
    with pytest.raises(ValueError):
        StaircaseParams.create(8, 2)


def test_error_free_stream_unchanged(toy):
    rng = np.random.default_rng(1)
    blocks = _encode_stream(toy, rng, 15)
    dec = StaircaseDecoder(toy)
    decoded, ber = decode_stream(toy, blocks.copy(), blocks)
    assert ber == 0.0
    assert np.array_equal(decoded, blocks)
    assert dec.flips == 0


def test_single_flip_corrected(toy):
    rng = np.random.default_rng(2)
    blocks = _encode_stream(toy, rng, 15)
    for flip in [(0, 3, 5), (7, 0, 0), (14, 15, 15)]:
        noisy = blocks.copy()
        noisy[flip] ^= 1
        _, ber = decode_stream(toy, noisy, blocks)
        assert ber == 0.0


def test_low_noise_corrected(toy):
    rng = np.random.default_rng(3)
    blocks = _encode_stream(toy, rng, 40)
    noisy = blocks ^ (rng.random(blocks.shape) < 0.004).astype(np.uint8)
    _, ber = decode_stream(toy, noisy, blocks)
    assert ber == 0.0


def test_ber_nonincreasing_in_iterations(toy):
    rng = np.random.default_rng(4)
    blocks = _encode_stream(toy, rng, 60)
    noise = (np.random.default_rng(99).random(blocks.shape) < 0.03).astype(np.uint8)
    bers = []
    for iters in (1, 2, 4, 8):
        params = StaircaseParams.create(16, 2, max_iters=iters)
        _, ber = decode_stream(params, blocks ^ noise, blocks)
        bers.append(ber)
    assert all(a >= b for a, b in zip(bers, bers[1:]))


def test_jacobi_mode_corrects(toy):
    params = StaircaseParams.create(16, 2, jacobi=True)
    rng = np.random.default_rng(5)
    blocks = _encode_stream(params, rng, 30)
    noisy = blocks ^ (rng.random(blocks.shape) < 0.004).astype(np.uint8)
    _, ber = decode_stream(params, noisy, blocks)
    assert ber == 0.0


def test_minimal_stall_pattern_stalls(toy):
    """A (t+1)x(t+1) error grid confined to one block is never corrected:
    every touching component word holds t+1 > t errors."""
    rng = np.random.default_rng(6)
    blocks = _encode_stream(toy, rng, 12)
    mask = minimal_stall_pattern(toy, rows=[2, 7, 11], cols=[1, 8, 13])
    noisy = blocks.copy()
    noisy[5] ^= mask
    decoded, _ = decode_stream(toy, noisy, blocks)
    assert np.array_equal(decoded[5], blocks[5] ^ mask)
    # no other block was touched
    for i in range(12):
        if i != 5:
            assert np.array_equal(decoded[i], blocks[i])


def test_error_floor_estimate_behavior(toy):
    assert error_floor_estimate(toy, 1e-12) < error_floor_estimate(toy, 1e-3)
    tiny = error_floor_estimate(toy, 1e-30)
    assert tiny >= 0.0 and tiny < 1e-200
    with pytest.raises(ValueError):
        error_floor_estimate(toy, 0.7)


def test_net_coding_gain_edges():
    # rate-1 code with no improvement contributes no gain
    assert net_coding_gain(1.0, 1e-3, 1e-3 * (1 - 1e-12)) == pytest.approx(
        0.0, abs=1e-6
    )
    with pytest.raises(ValueError):
        net_coding_gain(0.9, 0.6, 1e-15)
    with pytest.raises(ValueError):
        net_coding_gain(0.9, 1e-3, 1e-2)


def test_simulate_bsc_counts(toy):
    res = simulate_bsc(toy, 0.004, np.random.default_rng(7), 200_000)
    assert res["bits"] >= 200_000
    assert res["ber"] == 0.0
    assert res["blocks"] == res["bits"] // toy.info_bits_per_block


def test_block_stream_framing_roundtrip(tmp_path, toy):
    rng = np.random.default_rng(8)
    blocks = _encode_stream(toy, rng, 5)
    path = tmp_path / "stream.scbs"
    write_block_stream(path, toy, blocks)
    (m, r, t), back = read_block_stream(path)
    assert (m, r, t) == (16, toy.parity_bits, 2)
    assert np.array_equal(back, blocks)
    raw = path.read_bytes()
    assert raw[:4] == b"SCBS"
    assert len(raw) == 16 + 5 * ((16 * 16 + 7) // 8)
