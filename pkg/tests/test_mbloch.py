import numpy as np
import pytest

import oracles
from qantenna import (
    AngularGrid,
    BlochTrajectory,
    Component,
    ComponentSpec,
    ExcitationState,
    IntegrationError,
    MBParams,
    coupling_kernel,
    equispaced,
    integrate,
    pattern,
    poynting_pattern,
    pulse_peak_time,
)
from qantenna.mbloch import _NOISE_CHUNK, _NoiseSource, coupling_matrix, export_trajectory, run_components

G3 = equispaced(3, 4.5)
N3_PAIR = ExcitationState.from_terms(3, {(2, 1): 1.0, (3, 2): 1.0})
FAST = dict(geometry=G3, dt=5e-3, t_end=60.0, record_every=2)


@pytest.fixture(scope="module")
def mirrored_run():
    p = MBParams(realizations=6, base_seed=11, **FAST)
    return run_components(p, ComponentSpec.from_state(N3_PAIR), keep_trajectories=True)


def test_kernel_value():
    assert coupling_kernel(4.5) == pytest.approx(oracles.KERNEL_AT_4_5, rel=1e-14)


def test_kernel_far_field():
    x = np.array([1e2, 1e4, 1e6])
    err = np.abs(coupling_kernel(x) * x * np.exp(-1j * x) - 1)
    assert np.all(np.diff(err) < 0) and err[-1] < 1e-5


@pytest.mark.parametrize("x", [0.0, -1.0])
def test_kernel_rejects_nonpositive(x):
    with pytest.raises(ValueError):
        coupling_kernel(x)


def test_coupling_matrix_mirror_symmetric():
    K = coupling_matrix(equispaced(5, 2.3))
    np.testing.assert_array_equal(K, K.T)
    np.testing.assert_array_equal(K, K[::-1, ::-1])
    assert np.all(np.diag(K) == 0)


@pytest.mark.parametrize(
    "kw", [dict(dt=0.0), dict(dt=-1e-3), dict(tau1=0.0), dict(realizations=0), dict(noise_mode="pink")]
)
def test_params_validation(kw):
    with pytest.raises(ValueError):
        MBParams(geometry=G3, **kw)


def test_ground_state_is_fixed_point():
    p = MBParams(geometry=G3, dt=1e-2, t_end=5.0, noise_amplitude=0.0, tau1=10.0, tau2=10.0)
    t = integrate(p, [-1, -1, -1])
    assert np.all(t.R == 0)
    assert np.all(t.Z == -1)


def test_inverted_decay_without_noise():
    tau1 = 10.0
    p = MBParams(geometry=G3, dt=1e-2, t_end=20.0, noise_amplitude=0.0, tau1=tau1, tau2=tau1)
    t = integrate(p, [1, 1, 1])
    assert np.all(t.R == 0)
    np.testing.assert_allclose(t.Z, oracles.z_free_decay(t.times, tau1)[:, None] * np.ones(3), atol=1e-10)


def test_superradiant_pulse():
    t = integrate(MBParams(**FAST), [-1, 1, 1])
    I = t.intensity()
    tp = pulse_peak_time(t)
    assert tp > 0
    assert I.max() > 10 * I[t.index_at(1.0)]


def test_integration_is_reproducible():
    p = MBParams(geometry=G3, dt=1e-2, t_end=10.0, noise_amplitude=1e-2)
    a, b = integrate(p, [1, 1, -1], realization=3), integrate(p, [1, 1, -1], realization=3)
    np.testing.assert_array_equal(a.R, b.R)
    c = integrate(p, [1, 1, -1], realization=4)
    assert not np.array_equal(a.R, c.R)


def test_blowup_raises():
    p = MBParams(geometry=equispaced(3, 0.05), dt=0.5, t_end=50.0, noise_amplitude=0.1)
    with pytest.raises(IntegrationError):
        integrate(p, [1, 1, 1])


def test_chunked_noise_equals_single_draw():
    a = _NoiseSource(3, 1, 2)
    chunks = np.concatenate([a.draw(_NOISE_CHUNK), a.draw(_NOISE_CHUNK), a.draw(17)])
    b = _NoiseSource(3, 1, 2)
    np.testing.assert_array_equal(chunks, b.draw(2 * _NOISE_CHUNK + 17))


def test_chunk_boundary_does_not_change_trajectory():
    # more steps than one noise chunk: compare a batch of two with single runs
    p = MBParams(geometry=G3, dt=1e-2, t_end=50.0, noise_amplitude=1e-3)
    assert p.n_steps > _NOISE_CHUNK
    from qantenna.mbloch import _integrate_batch

    times, Rh, Zh, failed = _integrate_batch(p, np.array([-1.0, 1, 1]), [0, 1], [0, 1, 2])
    for r in (0, 1):
        np.testing.assert_array_equal(integrate(p, [-1, 1, 1], realization=r).R, Rh[:, r])


def _traj(R, times=None):
    R = np.atleast_2d(np.asarray(R, dtype=complex))
    times = np.arange(len(R), dtype=float) if times is None else times
    return BlochTrajectory(times, R, np.zeros(R.shape))


def test_peak_time_synthetic():
    I = np.exp(-((np.arange(40) - 17.0) ** 2) / 10)
    t = _traj(np.sqrt(I)[:, None], times=np.linspace(0, 3.9, 40))
    assert pulse_peak_time(t) == t.times[17]


def test_peak_time_monotone_decay():
    t = _traj(np.exp(-np.arange(10.0))[:, None])
    assert pulse_peak_time(t) == 0.0


def test_poynting_single_emitter_flat():
    g = equispaced(3, 2.0)
    S = poynting_pattern(_traj([[0, 0.3j, 0]]), g, AngularGrid.uniform(30), 0.0)
    np.testing.assert_allclose(S, 0.09)


def test_poynting_two_element():
    g = equispaced(2, np.pi)
    grid = AngularGrid.uniform(31)
    S = poynting_pattern(_traj([[1, 1]]), g, grid, 0.0)
    np.testing.assert_allclose(S, oracles.two_element_factor(np.pi, grid.thetas), atol=1e-12)
    assert S[0] == pytest.approx(0.0, abs=1e-12)


def test_poynting_nonnegative(rng):
    g = equispaced(4, 1.3)
    R = rng.standard_normal((5, 4)) + 1j * rng.standard_normal((5, 4))
    assert poynting_pattern(_traj(R), g, AngularGrid.uniform(20), 2.0).min() >= 0


def test_component_spec_from_state():
    spec = ComponentSpec.from_state(N3_PAIR)
    assert [c.excited for c in spec.components] == [(1, 2), (2, 3)]
    with pytest.raises(ValueError):
        ComponentSpec(())
    with pytest.raises(ValueError):
        ComponentSpec((Component((4,), ((4, 1),)),)).validate(3)


def test_mirror_identity_bitwise(mirrored_run):
    a, b = mirrored_run.trajectories
    for ra, rb in zip(a, b):
        np.testing.assert_array_equal(ra.R, rb.R[:, ::-1])
        np.testing.assert_array_equal(ra.Z, rb.Z[:, ::-1])


def test_mirrored_matches_quantum(mirrored_run):
    grid = AngularGrid.uniform(60)
    q = pattern(G3, N3_PAIR, grid, normalize=True).values
    sc = mirrored_run.pattern(grid, normalize=True).values
    assert np.abs(sc - q).max() <= 0.05


def test_mirrored_pattern_time_independent():
    p = MBParams(realizations=3, **FAST)
    spec = ComponentSpec.from_state(N3_PAIR)
    grid = AngularGrid.uniform(50)
    a = run_components(p, spec).pattern(grid, normalize=True).values
    b = run_components(p, spec, time_factor=1.2).pattern(grid, normalize=True).values
    assert np.abs(a - b).max() <= 0.05


def test_export_trajectory(tmp_path, mirrored_run):
    t = mirrored_run.trajectories[0][0]
    path = tmp_path / "t.csv"
    export_trajectory(t, path)
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    assert data.shape == (len(t.times), 1 + 3 * 3)
    np.testing.assert_allclose(data[:, 1] + 1j * data[:, 2], t.R[:, 0], rtol=1e-10, atol=1e-300)


def test_bloch_sphere_bound(mirrored_run):
    p = MBParams(realizations=6, base_seed=11, **FAST)
    bound = 1 + 10 * p.noise_amplitude * p.t_end
    for comp in mirrored_run.trajectories:
        for t in comp:
            assert np.max(np.abs(t.R) ** 2 + t.Z**2) <= bound
            assert np.all(np.abs(t.Z) <= 1.1)
