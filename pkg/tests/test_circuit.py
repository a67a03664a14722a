import numpy as np
import pytest

from floqnet.circuit import (
    BellPrep,
    CircuitError,
    Depolarize1,
    Depolarize2,
    Detector,
    MeasurePP,
    NoiseParams,
    Observable,
    build_memory_circuit,
    circuit_to_text,
    find_logical_observables,
    parse_circuit,
    validate_determinism,
)
from floqnet.lattice import (
    Edge,
    Face,
    Lattice,
    RotationSystem,
    color_faces,
    derive_faces,
    generate_honeycomb_torus,
)
from floqnet.partition import partition_code


@pytest.fixture(scope="module")
def hc():
    return generate_honeycomb_torus(3, 3)


@pytest.fixture(scope="module")
def hc_part(hc):
    return partition_code(hc, 16)


def test_noise_params_validation():
    with pytest.raises(CircuitError):
        NoiseParams(-0.1, 0.0)
    with pytest.raises(CircuitError):
        NoiseParams(0.0, 1.5)
    with pytest.raises(CircuitError):
        NoiseParams(0.0, 0.0, bell_wait_cycles=-1)
    assert NoiseParams(1e-3, 1e-2).bell_wait_cycles == 5


def test_find_logicals_torus(hc):
    logicals = find_logical_observables(hc)
    assert len(logicals) == 2


def test_find_logicals_sphere_empty():
    edges = [(0, 1), (0, 1), (0, 1)]
    rot = RotationSystem(((0, 1, 2), (2, 1, 0)))
    cycles = derive_faces(2, edges, rot)
    theta = color_faces(
        Lattice(
            name="theta",
            schlafli=(2, 3),
            genus=0,
            n_vertices=2,
            edges=tuple(Edge(u, v) for u, v in edges),
            faces=tuple(Face(c) for c in cycles),
        )
    )
    assert len(find_logical_observables(theta)) == 0


def test_subround_color_discipline(hc):
    c = build_memory_circuit(hc, None, NoiseParams(1e-3, 0), 2)
    pauli_of_color = {0: "X", 1: "Y", 2: "Z"}
    sub = -1
    for instr in c.instructions:
        if isinstance(instr, MeasurePP) and len(instr.products[0]) == 2:
            sub += 1
            expect = pauli_of_color[sub % 3]
            for prod in instr.products:
                assert all(p == expect for _, p in prod)
    assert sub + 1 == 12  # 6 sub-rounds per detector round, one MPP batch each


def test_instruction_count_matches_hand_count(hc):
    # single cluster, 2 detector rounds: per sub-round one pair measurement
    # per edge of the measured colour (27 edges / 3 colours = 9), plus 18
    # transversal readouts: 12*9 + 18 = 126 records
    c = build_memory_circuit(hc, None, NoiseParams(1e-3, 0), 2)
    assert c.n_records == 12 * 9 + 18


def test_noiseless_circuit_omits_noise(hc):
    c = build_memory_circuit(hc, None, NoiseParams(0, 0), 1)
    assert not any(
        isinstance(i, (Depolarize1, Depolarize2)) for i in c.instructions
    )


def test_bellprep_census(hc, hc_part):
    noise = NoiseParams(1e-3, 1e-2)
    rounds = 2
    c = build_memory_circuit(hc, hc_part, noise, rounds)
    n_bell = sum(len(i.pairs) for i in c.instructions if isinstance(i, BellPrep))
    # one Bell state per non-local check execution: |E'| per plaquette round
    assert n_bell == 2 * rounds * len(hc_part.nonlocal_edges)
    n_nl_dep = sum(
        len(i.pairs)
        for i in c.instructions
        if isinstance(i, Depolarize2) and i.p == noise.p_nonlocal
    )
    assert n_nl_dep == n_bell


def test_idle_layer_census(hc, hc_part):
    noise = NoiseParams(1e-3, 1e-2, bell_wait_cycles=5)
    c = build_memory_circuit(hc, hc_part, noise, 1)
    idle = [
        i
        for i in c.instructions
        if isinstance(i, Depolarize1) and i.targets == c.data_qubits
    ]
    # init layer + final layer + (duration-1) layers per sub-round; every
    # sub-round has a non-local check here so duration = 5
    assert len(idle) == 2 + 6 * (noise.bell_wait_cycles - 1)
    nowait = build_memory_circuit(hc, hc_part, NoiseParams(1e-3, 1e-2, 1), 1)
    idle0 = [
        i
        for i in nowait.instructions
        if isinstance(i, Depolarize1) and i.targets == nowait.data_qubits
    ]
    assert len(idle0) == 2


@pytest.mark.parametrize("rounds", [1, 2])
def test_determinism_single_and_partitioned(hc, hc_part, rounds):
    for part in (None, hc_part):
        c = build_memory_circuit(hc, part, NoiseParams(1e-3, 1e-2), rounds)
        assert validate_determinism(c).ok


def test_determinism_catches_corrupted_detector(hc):
    c = build_memory_circuit(hc, None, NoiseParams(1e-3, 0), 1)
    bad = list(c.detectors)
    victim = bad[3]
    corrupt = tuple(
        list(victim.records[:-1]) + [(victim.records[-1] + 1) % c.n_records]
    )
    bad[3] = Detector(corrupt, face=victim.face, anchor=victim.anchor)
    c.detectors = tuple(bad)
    report = validate_determinism(c)
    assert not report.ok
    assert any(i == 3 for i, _ in report.failing_detectors)


def test_determinism_catches_corrupted_observable(hc):
    c = build_memory_circuit(hc, None, NoiseParams(1e-3, 0), 1)
    obs = list(c.observables)
    victim = obs[0]
    obs[0] = Observable(victim.index, victim.records[:-1])
    c.observables = tuple(obs)
    report = validate_determinism(c)
    assert not report.ok
    assert any(i == victim.index for i, _ in report.failing_observables)


def test_rejects_bad_round_count(hc):
    with pytest.raises(CircuitError):
        build_memory_circuit(hc, None, NoiseParams(0, 0), 0)
    with pytest.raises(CircuitError):
        build_memory_circuit(hc, None, NoiseParams(0, 0), 1, basis="X")


def test_serialization_round_trip(hc, hc_part):
    c = build_memory_circuit(hc, hc_part, NoiseParams(1e-3, 1e-2), 2)
    text = circuit_to_text(c)
    c2 = parse_circuit(text)
    assert c2.instructions == c.instructions
    assert c2.detectors == c.detectors
    assert c2.observables == c.observables
    assert c2.n_qubits == c.n_qubits
    assert c2.data_qubits == c.data_qubits
    assert c2.bell_ancillas == c.bell_ancillas
    assert circuit_to_text(c2) == text
    # parsed circuits can regenerate the reference and still validate
    assert validate_determinism(c2).ok


def test_reference_outcomes_regenerated(hc):
    c = build_memory_circuit(hc, None, NoiseParams(1e-3, 0), 1)
    ref = c.reference.copy()
    c2 = parse_circuit(circuit_to_text(c))
    assert np.array_equal(c2.ensure_reference(), ref)
