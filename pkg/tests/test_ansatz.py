import json

import numpy as np
import pytest

from ddqcl.ansatz import (
    Ansatz,
    CzGate,
    RyGate,
    Topology,
    build_ansatz,
    execute,
    line_topology,
    star_topology,
    u2_block,
)
from ddqcl.bas import BasSpec, bas_target_distribution
from ddqcl.metrics import js_divergence
from ddqcl.sim import probabilities, zero_state

# 4x4 matrix oracle for the two-qubit primitive, built from scratch
_CZ = np.diag([1.0, 1.0, 1.0, -1.0])


def _ry_mat(t):
    return np.array([[np.cos(t / 2), -np.sin(t / 2)], [np.sin(t / 2), np.cos(t / 2)]])


def _u2_oracle(theta, gamma, beta):
    i2 = np.eye(2)
    v = np.zeros(4)
    v[0] = 1.0
    v = np.kron(i2, _ry_mat(beta)) @ v
    v = np.kron(_ry_mat(gamma), i2) @ v
    v = _CZ @ v
    v = np.kron(_ry_mat(theta), i2) @ v
    return v


# --- topology ---


def test_presets():
    assert line_topology(4).edges == ((0, 1), (1, 2), (2, 3))
    assert star_topology(4).edges == ((0, 1), (0, 2), (0, 3))


def test_topology_validation():
    with pytest.raises(ValueError):
        Topology(2, ((0, 0),))
    with pytest.raises(ValueError):
        Topology(2, ((0, 2),))
    with pytest.raises(ValueError):
        Topology(3, ((0, 1), (1, 0)))


# --- construction ---


def test_gate_counts_one_layer_line():
    a = build_ansatz(4, line_topology(4), 1)
    assert a.param_count == 10
    assert sum(isinstance(g, RyGate) for g in a.gates) == 10
    assert sum(isinstance(g, CzGate) for g in a.gates) == 3


def test_gate_counts_two_layer_star():
    a = build_ansatz(4, star_topology(4), 2)
    assert a.param_count == 16
    assert sum(isinstance(g, RyGate) for g in a.gates) == 16
    assert sum(isinstance(g, CzGate) for g in a.gates) == 6


def test_param_slots_each_used_once():
    a = build_ansatz(4, star_topology(4), 3)
    slots = [g.param_slot for g in a.gates if isinstance(g, RyGate)]
    assert sorted(slots) == list(range(a.param_count))


def test_param_count_formula():
    rng = np.random.default_rng(0)
    for _ in range(20):
        n = int(rng.integers(2, 7))
        layers = int(rng.integers(1, 4))
        topo = line_topology(n) if rng.random() < 0.5 else star_topology(n)
        a = build_ansatz(n, topo, layers)
        assert a.param_count == n + layers * 2 * len(topo.edges)


def test_two_qubit_single_edge_layout():
    a = build_ansatz(2, Topology(2, ((0, 1),)), 1)
    kinds = [type(g).__name__ for g in a.gates]
    assert kinds == ["RyGate", "RyGate", "CzGate", "RyGate", "RyGate"]


def test_layers_zero_keeps_initial_rotations_only():
    a = build_ansatz(3, line_topology(3), 0)
    assert a.param_count == 3
    assert all(isinstance(g, RyGate) for g in a.gates)


def test_entangling_layers_need_edges():
    with pytest.raises(ValueError):
        build_ansatz(2, Topology(2, ()), 1)
    with pytest.raises(ValueError):
        build_ansatz(3, line_topology(4), 1)


# --- execution ---


def test_zero_params_is_zero_state():
    a = build_ansatz(4, line_topology(4), 2)
    out = execute(a, np.zeros(16))
    np.testing.assert_array_equal(out.amplitudes, zero_state(4).amplitudes)


def test_param_length_checked():
    a = build_ansatz(4, line_topology(4), 1)
    with pytest.raises(ValueError):
        execute(a, np.zeros(9))


def test_angles_reduced_mod_2pi():
    a = build_ansatz(3, star_topology(3), 1)
    rng = np.random.default_rng(1)
    p = rng.uniform(0, 2 * np.pi, a.param_count)
    s1 = execute(a, p)
    s2 = execute(a, p + 2 * np.pi)
    s3 = execute(a, p - 4 * np.pi)
    np.testing.assert_allclose(s1.amplitudes, s2.amplitudes, atol=1e-12)
    np.testing.assert_allclose(s1.amplitudes, s3.amplitudes, atol=1e-12)


def test_execute_pure_function():
    a = build_ansatz(4, line_topology(4), 2)
    p = np.linspace(0, 5, 16)
    np.testing.assert_array_equal(execute(a, p).amplitudes, execute(a, p).amplitudes)


def test_real_amplitudes():
    a = build_ansatz(4, star_topology(4), 2)
    out = execute(a, np.random.default_rng(2).uniform(0, 2 * np.pi, 16))
    assert np.max(np.abs(out.amplitudes.imag)) == 0.0


def test_single_edge_ansatz_subsumes_u2():
    # initial rotations carry (gamma, beta), the edge pair carries (theta, 0)
    a = build_ansatz(2, Topology(2, ((0, 1),)), 1)
    rng = np.random.default_rng(3)
    for _ in range(20):
        theta, gamma, beta = rng.uniform(0, 2 * np.pi, 3)
        got = execute(a, np.array([gamma, beta, theta, 0.0]))
        np.testing.assert_allclose(got.amplitudes, u2_block(theta, gamma, beta).amplitudes,
                                   atol=1e-12)


# --- the two-qubit primitive ---


def test_u2_identity():
    np.testing.assert_array_equal(u2_block(0, 0, 0).amplitudes, zero_state(2).amplitudes)


def test_u2_half_pi_on_control():
    out = u2_block(np.pi / 2, 0, 0)
    np.testing.assert_allclose(out.amplitudes, [1 / np.sqrt(2), 0, 1 / np.sqrt(2), 0],
                               atol=1e-12)


def test_u2_quarter_probs():
    out = u2_block(np.pi / 2, 0, np.pi / 2)
    np.testing.assert_allclose(probabilities(out).probs, np.full(4, 0.25), atol=1e-12)


def test_u2_entangles():
    # rotations on both qubits before the CZ: this is CZ|++> up to locals
    out = u2_block(0, np.pi / 2, np.pi / 2)
    np.testing.assert_allclose(out.amplitudes, [0.5, 0.5, 0.5, -0.5], atol=1e-12)


def test_u2_matches_matrix_oracle():
    rng = np.random.default_rng(4)
    for _ in range(200):
        t, g, b = rng.uniform(-2 * np.pi, 2 * np.pi, 3)
        np.testing.assert_allclose(u2_block(t, g, b).amplitudes, _u2_oracle(t, g, b),
                                   atol=1e-10)


def test_u2_reaches_random_real_states():
    # finite probe of the "any real-amplitude 2-qubit state" claim
    from scipy.optimize import minimize

    rng = np.random.default_rng(5)
    for _ in range(10):
        target = rng.normal(size=4)
        target /= np.linalg.norm(target)

        def infidelity(angles):
            amp = u2_block(*angles).amplitudes.real
            return 1.0 - np.dot(amp, target) ** 2

        best = min(
            minimize(infidelity, rng.uniform(0, 2 * np.pi, 3), method="Nelder-Mead").fun
            for _ in range(5)
        )
        assert best < 1e-3  # fidelity > 0.999


# --- serialization ---


def test_json_document_roundtrip():
    a = build_ansatz(4, star_topology(4), 2)
    doc = json.loads(json.dumps(a.to_json_dict()))
    assert doc["param_count"] == 16
    assert doc["layers"] == 2
    assert doc["edges"] == [[0, 1], [0, 2], [0, 3]]
    assert len([g for g in doc["gates"] if g["gate"] == "cz"]) == 6
    assert [g["param_slot"] for g in doc["gates"] if g["gate"] == "ry"] == list(range(16))


# --- trained-model regression fixture ---

# parameters produced by the batch trainer on the 2-layer line circuit for the
# 2x2 bars-and-stripes target; frozen here to pin the whole execution pipeline
TRAINED_LINE2_PARAMS = np.array([
    4.6686410740357474, 4.8763622491930718, 1.6076016818392969, 5.0068348626533155,
    0.26860540963470342, 3.741523016244539, 1.6078598290965311, 1.8771324093846957,
    1.5938046257448248, 5.0793207542056695, 1.2332341789343209, 6.3312331273159934,
    -1.0016884843055431, 2.3554616376623323, 2.7213903333135292, 4.7084394765503053,
])


def test_trained_params_reproduce_target():
    a = build_ansatz(4, line_topology(4), 2)
    model = probabilities(execute(a, TRAINED_LINE2_PARAMS))
    target = bas_target_distribution(BasSpec(2, 2))
    assert js_divergence(model, target) < 0.05
