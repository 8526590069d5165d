"""Channel and geometry generator tests."""

import numpy as np
import pytest

from bdris_isac import (
    SystemConfig,
    bs_ris_channel,
    build_geometry,
    element_positions,
    generate_channels,
    pathloss_user,
    rayleigh_user_channel,
    spatial_correlation,
    sqrt_psd,
    target_steering,
    ula_steering,
)
from bdris_isac.channel import bs_ris_pathloss_db, elevation_azimuth
from bdris_isac.errors import NotPSD, ZeroDistance


def test_element_positions_first_element_at_origin():
    pos = element_positions(4, 3, 0.03)
    np.testing.assert_allclose(pos[0], [0.0, 0.0, 0.0])


def test_element_positions_second_element_half_wavelength_in_y():
    pos = element_positions(4, 3, 0.03)
    np.testing.assert_allclose(pos[1], [0.0, 0.015, 0.0])


def test_element_positions_row_wrap_increments_z():
    pos = element_positions(4, 3, 0.03)
    np.testing.assert_allclose(pos[4], [0.0, 0.0, 0.015])


def test_spatial_correlation_unit_diagonal():
    R = spatial_correlation(4, 2, 0.05)
    np.testing.assert_allclose(np.diag(R), 1.0)


def test_spatial_correlation_adjacent_elements_uncorrelated():
    # Half-wavelength neighbours land on the sinc zero.
    R = spatial_correlation(4, 2, 0.05)
    assert abs(R[0, 1]) < 1e-15


def test_spatial_correlation_psd():
    R = spatial_correlation(2, 2, 0.03)
    assert np.allclose(R, R.T)
    assert np.linalg.eigvalsh(R).min() >= -1e-12


def test_sqrt_psd_identity():
    np.testing.assert_allclose(sqrt_psd(np.eye(3)), np.eye(3), atol=1e-14)


def test_sqrt_psd_diagonal():
    np.testing.assert_allclose(sqrt_psd(np.diag([4.0, 1.0])), np.diag([2.0, 1.0]))


def test_sqrt_psd_reconstructs_random_psd():
    rng = np.random.default_rng(1)
    X = rng.standard_normal((8, 8))
    R = X @ X.T
    S = sqrt_psd(R)
    assert np.linalg.norm(S @ S - R) <= 1e-10 * np.linalg.norm(R)


def test_sqrt_psd_rejects_indefinite():
    with pytest.raises(NotPSD):
        sqrt_psd(np.diag([1.0, -0.5]))


def test_rayleigh_zero_beta_gives_zero_vector():
    S = np.eye(4)
    f = rayleigh_user_channel(0.0, S, np.random.default_rng(0))
    np.testing.assert_allclose(f, 0.0)


def test_rayleigh_deterministic_for_fixed_seed():
    S = sqrt_psd(spatial_correlation(2, 2, 0.03))
    f1 = rayleigh_user_channel(0.5, S, np.random.default_rng(42))
    f2 = rayleigh_user_channel(0.5, S, np.random.default_rng(42))
    np.testing.assert_array_equal(f1, f2)


def test_rayleigh_sample_covariance_matches_model():
    # 1e5 draws, N=4: sample covariance within 5 percent of beta * S S^H.
    rng = np.random.default_rng(7)
    S = sqrt_psd(spatial_correlation(4, 1, 0.03))
    beta = 0.3
    draws = 100_000
    z = (rng.standard_normal((4, draws)) + 1j * rng.standard_normal((4, draws))) / np.sqrt(2)
    samples = np.sqrt(beta) * S @ z
    cov = samples @ samples.conj().T / draws
    target = beta * S @ S.conj().T
    assert np.linalg.norm(cov - target) <= 0.05 * np.linalg.norm(target)


def test_target_steering_broadside_all_equal():
    # elevation 90 deg, azimuth 0: both phase ramps vanish.
    f = target_steering(np.pi / 2, 0.0, 4, 2)
    np.testing.assert_allclose(f, np.full(8, 1 / np.sqrt(8)), atol=1e-15)


def test_target_steering_unit_norm_any_angles():
    rng = np.random.default_rng(3)
    for _ in range(20):
        el, az = rng.uniform(0, np.pi), rng.uniform(-np.pi, np.pi)
        f = target_steering(el, az, 8, 4)
        assert abs(np.linalg.norm(f) - 1.0) < 1e-12
        np.testing.assert_allclose(np.abs(f), 1 / np.sqrt(32), atol=1e-14)


def test_target_steering_hand_case_linear_array():
    # elevation 90, azimuth 45, n1=4, n2=1: entry m is exp(-j pi (m-1) sqrt(2)/2) / 2.
    f = target_steering(np.pi / 2, np.pi / 4, 4, 1)
    m = np.arange(4)
    expected = np.exp(-1j * np.pi * m * np.sqrt(2) / 2) / 2
    np.testing.assert_allclose(f, expected, atol=1e-14)


def test_pathloss_reference_distances():
    assert pathloss_user(1.0) == pytest.approx(1e-3)
    assert pathloss_user(10.0) == pytest.approx(1e-5)


def test_pathloss_inverse_square():
    assert pathloss_user(14.0) == pytest.approx(pathloss_user(7.0) / 4)


def test_pathloss_rejects_zero_distance():
    with pytest.raises(ZeroDistance):
        pathloss_user(0.0)


def _steering_pair(n1=4, n2=2, m=3):
    a_ris = target_steering(np.pi / 3, np.pi / 5, n1, n2)
    a_bs = ula_steering(m, 0.0)
    return a_ris, a_bs


def test_bs_ris_channel_pure_los_is_rank_one():
    G = bs_ris_channel(20.0, 1e12, _steering_pair(), np.random.default_rng(0))
    s = np.linalg.svd(G, compute_uv=False)
    assert s[1] / s[0] <= 1e-5


def test_bs_ris_channel_average_entry_power():
    # 1e4 draws at d=20: mean entry power within 5 percent of the path loss.
    rng = np.random.default_rng(11)
    pair = _steering_pair()
    target = 10 ** (-bs_ris_pathloss_db(20.0) / 10)
    total, draws = 0.0, 10_000
    for _ in range(draws):
        G = bs_ris_channel(20.0, 10.0, pair, rng)
        total += np.mean(np.abs(G) ** 2)
    assert abs(total / draws - target) <= 0.05 * target


def test_bs_ris_channel_deterministic():
    pair = _steering_pair()
    G1 = bs_ris_channel(20.0, 10.0, pair, np.random.default_rng(5))
    G2 = bs_ris_channel(20.0, 10.0, pair, np.random.default_rng(5))
    np.testing.assert_array_equal(G1, G2)


def test_bs_ris_channel_rejects_zero_distance():
    with pytest.raises(ZeroDistance):
        bs_ris_channel(0.0, 10.0, _steering_pair(), np.random.default_rng(0))


def test_elevation_azimuth_recovers_axes():
    el, az = elevation_azimuth(np.array([0.0, 0.0, 2.0]))
    assert el == pytest.approx(0.0)
    el, az = elevation_azimuth(np.array([1.0, 1.0, 0.0]))
    assert el == pytest.approx(np.pi / 2)
    assert az == pytest.approx(np.pi / 4)


def test_generate_channels_deterministic_and_shaped():
    cfg = SystemConfig(m_antennas=3, k_users=2, n1=4, n2=2, seed=9)
    ch1 = generate_channels(cfg, np.random.default_rng(9))
    ch2 = generate_channels(cfg, np.random.default_rng(9))
    np.testing.assert_array_equal(ch1.G, ch2.G)
    np.testing.assert_array_equal(ch1.f_users, ch2.f_users)
    assert ch1.G.shape == (8, 3)
    assert ch1.f_users.shape == (2, 8)
    assert abs(np.linalg.norm(ch1.f_target) - 1.0) < 1e-12
    assert np.all(ch1.betas > 0)


def test_geometry_user_drop_within_annulus():
    cfg = SystemConfig(k_users=50, user_radius_min=5.0, user_radius_max=30.0)
    geom = build_geometry(cfg, np.random.default_rng(2))
    d = geom.user_distances
    assert np.all(d >= 5.0) and np.all(d <= 30.0)
    assert np.all(geom.user_positions[:, 2] == 0.0)
