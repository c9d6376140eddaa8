import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ctev import specfun
from ctev.dispersion import Medium, d_disk, d_sphere
from ctev.exceptions import InvalidArgumentError, ResonanceError
from ctev.forward import (
    NearFieldDataset,
    disk_boundary_traces,
    farfield_operator_eigs,
    farfield_pattern,
    lsm_gnorm,
    mie_alpha_disk,
    mie_lambda_disk,
    mie_lambda_sphere,
    modal_ratio,
    plane_wave_expansion,
    synth_nearfield,
    truncation_order,
)
from ctev.verify import circle_fit_residual

media = st.builds(Medium, st.floats(1.2, 6.0), st.floats(0.0, 3.0))


def _scattered_coefficient(geometry, p, k, med):
    """Solve the 2x2 transmission system for the outgoing coefficient c.

    Exterior: f(kr) + c h(kr); interior: b f(k sqrt(n) r).
    """
    if geometry == "sphere":
        f, df, h, dh = specfun.sph_bessel_j, specfun.sph_bessel_j_deriv, specfun.sph_hankel1, specfun.sph_hankel1_deriv
    else:
        f, df, h, dh = specfun.bessel_j, specfun.bessel_j_deriv, specfun.hankel1, specfun.hankel1_deriv
    a = k * np.sqrt(med.n)
    A = np.array([
        [h(p, k), -f(p, a)],
        [k * dh(p, k) + med.eta * h(p, k), -a * df(p, a)],
    ])
    rhs = -np.array([f(p, k), k * df(p, k) + med.eta * f(p, k)])
    c, _ = np.linalg.solve(A, rhs)
    return c


@settings(max_examples=30, deadline=None)
@given(st.floats(0.5, 10.0), media, st.integers(0, 8))
def test_modal_ratio_matches_direct_linear_solve(k, med, p):
    assert mie_lambda_sphere(p, k, med) == pytest.approx(-_scattered_coefficient("sphere", p, k, med), rel=1e-9, abs=1e-14)
    assert mie_alpha_disk(p, k, med) == pytest.approx(_scattered_coefficient("disk", p, k, med), rel=1e-9, abs=1e-14)


def test_numerator_is_the_dispersion_determinant():
    med = Medium(3.0, 0.4)
    ks = np.array([1.1, 2.5 + 0.3j, 7.0])
    for p in range(3):
        assert np.allclose(modal_ratio("sphere", p, ks, med)[0], d_sphere(ks, med, p), rtol=1e-14)
        assert np.allclose(modal_ratio("disk", p, ks, med)[0], d_disk(ks, med, p), rtol=1e-14)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.5, 10.0), media)
def test_energy_conservation_for_real_media(k, med):
    for p in range(truncation_order(k, med) + 1):
        assert abs(abs(1 - 2 * mie_lambda_sphere(p, k, med)) - 1) < 1e-10
        assert abs(abs(1 - 2 * mie_lambda_disk(p, k, med)) - 1) < 1e-10


@settings(max_examples=30, deadline=None)
@given(st.floats(0.5, 10.0), media)
def test_disk_eigenvalues_lie_on_the_circle(k, med):
    vals = [e.value for e in farfield_operator_eigs("disk", k, med)]
    assert max(abs(abs(v - 4j * np.pi) - 4 * np.pi) for v in vals) < 1e-8
    assert circle_fit_residual(vals) < 1e-8


def test_sphere_eigenvalue_labels():
    med = Medium(3.0, 1.0)
    eigs = farfield_operator_eigs("sphere", 2.0, med)
    assert [e.multiplicity for e in eigs[:3]] == [1, 3, 5]
    assert eigs[1].value == pytest.approx(4j * np.pi / 2.0 * mie_lambda_sphere(1, 2.0, med))
    disk = farfield_operator_eigs("disk", 2.0, med)
    assert [e.multiplicity for e in disk[:3]] == [1, 2, 2]


@settings(max_examples=20, deadline=None)
@given(st.floats(0.5, 8.0), media, st.floats(0, 2 * np.pi), st.floats(0, 2 * np.pi))
def test_reciprocity(k, med, a, b):
    u1 = farfield_pattern(a, b, k, med, "disk")
    u2 = farfield_pattern(b + np.pi, a + np.pi, k, med, "disk")
    assert abs(u1 - u2) <= 1e-10 * max(abs(u1), 1e-300)
    x = np.array([np.cos(a), np.sin(a), 0.3])
    y = np.array([0.2, np.cos(b), np.sin(b)])
    s1 = farfield_pattern(x, y, k, med, "sphere")
    s2 = farfield_pattern(-y, -x, k, med, "sphere")
    assert abs(s1 - s2) <= 1e-10 * max(abs(s1), 1e-300)


def test_pattern_is_stable_under_more_modes():
    med = Medium(3.0, 1.0)
    for g in ("disk", "sphere"):
        xhat, yhat = (0.3, 1.9) if g == "disk" else ((0.4, 0.1), (1.2, 2.0))
        base = farfield_pattern(xhat, yhat, 5.0, med, g)
        more = farfield_pattern(xhat, yhat, 5.0, med, g, P=truncation_order(5.0, med) + 30)
        assert abs(base - more) <= 1e-12 * abs(base)


@pytest.mark.parametrize("geometry,dim", [("disk", 2), ("sphere", 3)])
def test_jacobi_anger(geometry, dim):
    rng = np.random.default_rng(0)
    x = rng.uniform(-1, 1, (20, dim))
    d = rng.normal(size=dim)
    d /= np.linalg.norm(d)
    k = 6.0
    approx = plane_wave_expansion(x, d, k, 40, geometry)
    assert np.max(np.abs(approx - np.exp(1j * k * x @ d))) < 1e-12


def test_boundary_traces_satisfy_transmission_conditions():
    med = Medium(2.0, 0.7 + 0.3j)
    th = np.linspace(0, 2 * np.pi, 17)
    tr = disk_boundary_traces(1.5, med, 2.0, 0.4, th)
    assert np.max(np.abs(tr["dnu_plus"] + med.eta * tr["u_plus"] - tr["dnu_minus"])) < 1e-12


def test_synthetic_data_against_direct_sum():
    med = Medium(2.0, 0.5)
    nf = synth_nearfield(1.5, med, 2.0, n_src=8, n_rec=8)
    # direct evaluation of u^s(x, y) from the modal coefficients
    i, j = 3, 5
    psi = nf.receiver_angles[i] - nf.source_angles[j]
    total = 0j
    for m in range(-40, 41):
        am = mie_alpha_disk(abs(m), 1.5, med)
        total += 0.25j * am * specfun.hankel1(abs(m), 3.0) ** 2 * np.exp(1j * m * psi)
    assert nf.values[i, j] == pytest.approx(total, rel=1e-12)
    # source-receiver reciprocity on a common circle
    assert np.allclose(nf.values, nf.values.T, rtol=1e-12, atol=0)


def test_dataset_roundtrips(tmp_path):
    nf = synth_nearfield(1.5, Medium(2.0, 1 + 0.5j), n_src=6, n_rec=6)
    nf.to_csv(tmp_path / "d.csv")
    back = NearFieldDataset.from_csv(tmp_path / "d.csv")
    assert np.array_equal(back.values, nf.values)
    assert np.array_equal(back.source_angles, nf.source_angles)
    back = NearFieldDataset.from_json(nf.to_json(tmp_path / "d.json"))
    assert np.array_equal(back.values, nf.values) and back.meta == nf.meta
    assert np.array_equal(NearFieldDataset.from_json(tmp_path / "d.json").values, nf.values)


def test_dataset_validation(tmp_path):
    with pytest.raises(InvalidArgumentError):
        NearFieldDataset(1.0, 0.5, [0.0], [0.0], [[1.0]])
    with pytest.raises(InvalidArgumentError):
        NearFieldDataset(1.0, 2.0, [0.0, 1.0], [0.0], [[1.0]])
    (tmp_path / "bad.csv").write_text("a,b\n1,2\n")
    with pytest.raises(InvalidArgumentError):
        NearFieldDataset.from_csv(tmp_path / "bad.csv")


def test_lsm_norm_grows_toward_the_eigenvalue():
    med = Medium(3.0, 0.0)
    k_star = 4.443358
    vals = [lsm_gnorm(k_star + d, 0.3, med) for d in (0.1, 0.03, 0.01, 0.003, 0.001)]
    assert np.all(np.diff(vals) > 0)
    with pytest.raises(InvalidArgumentError):
        lsm_gnorm(4.0, 1.0, med)


def test_resonance_is_reported(monkeypatch):
    from ctev import forward

    # any denominator counts as vanishing once the floor is infinite
    monkeypatch.setattr(forward, "RESONANCE_FLOOR", np.inf)
    with pytest.raises(ResonanceError):
        mie_lambda_disk(0, 2.0, Medium(3.0))


def test_invalid_inputs():
    with pytest.raises(InvalidArgumentError):
        farfield_operator_eigs("disk", -1.0, Medium(3.0))
    with pytest.raises(InvalidArgumentError):
        synth_nearfield(1.0, Medium(3.0), R_C=0.9)
    with pytest.raises(InvalidArgumentError):
        farfield_pattern((1, 2, 3, 4), (0, 0), 1.0, Medium(3.0), "sphere")
