import numpy as np
import pytest

from quasargen import encodings as enc
from quasargen import landscape as ls
from quasargen import problems as pb

AXES = dict(axis1=np.array([1.0, 0.0]), axis2=np.array([0.0, 1.0]))


def reference_grid(objective, resolution=41, lam=1.0):
    spec = ls.GridSpec(objective=objective, resolution=resolution, **AXES)
    return ls.grid_eval(ls.REFERENCE_FEATURES, ls.REFERENCE_COST_DIRECTION,
                        lam=lam, beta=0.2, rho=0.03, spec=spec)


def test_product_landscape_center_is_stationary(small_graph):
    value, grad = ls.product_landscape(small_graph, np.full(4, 0.5))
    assert value == 0.0
    assert np.allclose(grad, 0.0)


def test_product_landscape_validation(small_graph):
    with pytest.raises(ValueError):
        ls.product_landscape(small_graph, np.full(5, 0.5))
    with pytest.raises(ValueError):
        ls.product_landscape(small_graph, np.array([0.5, 0.5, 0.5, 0.0]))


def test_product_landscape_vertex_identity():
    g = pb.erdos_renyi(5, 0.7, 3)
    total = g.weights.sum() / 2.0
    rng = np.random.default_rng(0)
    for _ in range(6):
        s = rng.choice([-1.0, 1.0], size=5)
        value, _ = ls.product_landscape(g, (1.0 + s) / 2.0, eps=0.0)
        assert value == pytest.approx(2.0 * total - 4.0 * g.cut_value(s), abs=1e-12)


def test_product_landscape_gradient_matches_fd():
    g = pb.erdos_renyi(6, 0.5, 7)
    rng = np.random.default_rng(1)
    p = rng.uniform(0.2, 0.8, size=6)
    _, grad = ls.product_landscape(g, p)
    step = 1e-6
    for i in range(6):
        hi = p.copy(); hi[i] += step
        lo = p.copy(); lo[i] -= step
        fd = (ls.product_landscape(g, hi)[0] - ls.product_landscape(g, lo)[0]) \
            / (2 * step)
        assert grad[i] == pytest.approx(fd, rel=1e-6, abs=1e-8)


def test_no_spurious_attractor_on_cycle_or_triangle():
    c4 = pb.Graph.from_edges(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)])
    k3 = pb.Graph.from_edges(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)])
    assert ls.find_bad_vertex(c4) is None
    assert ls.find_bad_vertex(k3) is None
    signs, cuts, maxcut = ls.strict_local_maxima(c4)
    assert maxcut == 4.0
    assert np.all(cuts == maxcut)     # every strict local max is global


def test_bad_vertex_witness_on_random_graph():
    g = pb.erdos_renyi(8, 0.5, 0)
    w = ls.find_bad_vertex(g)
    assert w is not None
    assert w.cut < w.maxcut
    assert w.condition_holds()
    # exhaustive confirmation: the witness is a strict local max of the cut
    base = g.cut_value(w.signs)
    assert base == w.cut
    for i in range(8):
        flipped = w.signs.copy()
        flipped[i] = -flipped[i]
        assert g.cut_value(flipped) < base
    # the margin vertex lies eps inside the cube, on the witness's side
    assert np.allclose(np.abs(2.0 * w.p_star - 1.0), 1.0 - 2.0 * w.eps)
    assert np.array_equal(np.sign(2.0 * w.p_star - 1.0), w.signs)
    d = w.to_dict()
    assert d["cut"] == w.cut and len(d["p_star"]) == 8


def test_grid_spec_validation():
    with pytest.raises(ValueError):
        ls.GridSpec(objective="banana", **AXES)
    with pytest.raises(ValueError):
        ls.GridSpec(resolution=1, **AXES)


def test_plain_grid_argmin_on_boundary():
    r = reference_grid("plain")
    assert not r.argmin_interior
    assert r.argmin == (40, 40)          # the corner farthest along (1, 1)
    assert r.argmin_point() == (8.0, 8.0)
    # the plain loss approaches the best cost from above as the softmax locks in
    assert r.values[r.argmin] == pytest.approx(-12.0, abs=0.01)


def test_regularized_grids_have_interior_argmins():
    entropy = reference_grid("entropy")
    mixture = reference_grid("mixture")
    assert entropy.argmin_interior
    assert mixture.argmin_interior
    assert entropy.argmin_point() == (3.0, 3.0)
    assert mixture.argmin_point() == (3.0, 3.0)
    # away from its minimizer the mixture keeps a working gradient while the
    # entropy-only surface flattens out
    assert mixture.min_grad_excluding(2) > entropy.min_grad_excluding(2) > 0


def test_refining_keeps_the_plain_argmin_on_the_boundary():
    for resolution in (21, 41, 61):
        r = reference_grid("plain", resolution=resolution)
        assert not r.argmin_interior


def test_huge_lambda_pins_argmin_at_zero():
    r = reference_grid("entropy", lam=1e6)
    assert r.argmin_point() == (0.0, 0.0)


def test_grid_csv(tmp_path):
    r = reference_grid("plain", resolution=5)
    vals = tmp_path / "values.csv"
    grads = tmp_path / "grads.csv"
    r.save_csv(vals, grads)
    for path in (vals, grads):
        lines = path.read_text().strip().splitlines()
        assert len(lines) == 6
        assert len(lines[1].split(",")) == 6


def test_vanishing_gradient_scan_thresholds(battery):
    e = battery["maxcut"]
    direction = -e.M
    taus = [0.0, 50.0]
    flat = ls.vanishing_gradient_scan(e, direction, taus, lam=1.0, beta=0.0,
                                      rho=0.03)
    mixed = ls.vanishing_gradient_scan(e, direction, taus, lam=1.0, beta=0.2,
                                       rho=0.03)
    assert flat[1][1] < 1e-8        # fully concentrated: the gradient is gone
    assert mixed[1][1] >= 1e-4      # the slow component keeps it alive
    # at tau = 0 both evaluate the uniform covariance, scaled by the mixture
    assert mixed[0][1] == pytest.approx(((1 - 0.2) + 0.2 * 0.03) * flat[0][1],
                                        rel=1e-12)


def test_scan_passes_through_the_minimizer(battery):
    # the ray hits -M/lam at tau = 1, an exact stationary point
    e = battery["maxcut"]
    table = ls.vanishing_gradient_scan(e, -e.M, [1.0], lam=1.0, beta=0.2,
                                       rho=0.03)
    assert table[0][1] < 1e-9
