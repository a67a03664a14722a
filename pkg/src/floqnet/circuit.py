"""Compilation of distributed Floquet-code memory experiments.

A memory experiment initialises all data qubits in Z, runs 6·R measurement
sub-rounds (sub-round t measures every edge of colour t mod 3 with that
colour's Pauli), then reads out transversally in Z.  Local checks are direct
two-qubit Pauli-product measurements; non-local checks route through a noisy
Bell pair and two local pair measurements whose XOR is the check value.

Detector and observable record sets are constructed rule-based and then
certified by a symbolic stabilizer simulation: a parity is only emitted as a
detector when its dependence on every measurement-randomness bit cancels.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from floqnet import gf2
from floqnet.lattice import Lattice, PAULI_OF_COLOR, validate_lattice
from floqnet.partition import Partition, validate_partition
from floqnet.tableau import Outcome, SymbolicTableau, pack_pauli

__all__ = [
    "NoiseParams",
    "Reset",
    "Depolarize1",
    "Depolarize2",
    "BellPrep",
    "MeasurePP",
    "Detector",
    "Observable",
    "CircuitProgram",
    "CircuitError",
    "DeterminismReport",
    "LogicalOperatorSet",
    "find_logical_observables",
    "build_memory_circuit",
    "validate_determinism",
    "circuit_to_text",
    "parse_circuit",
]


class CircuitError(ValueError):
    pass


@dataclass(frozen=True)
class NoiseParams:
    """Two-tier circuit noise: local error rate, Bell-pair error rate, and
    the system-wide stall (in gate cycles) while Bell states are heralded."""

    p_local: float
    p_nonlocal: float
    bell_wait_cycles: int = 5

    def __post_init__(self):
        for name in ("p_local", "p_nonlocal"):
            p = getattr(self, name)
            if not (0.0 <= p <= 1.0):
                raise CircuitError(f"{name}={p} is not a probability")
        if self.bell_wait_cycles < 0:
            raise CircuitError("bell_wait_cycles must be non-negative")


# ---------------------------------------------------------------------------
# instructions


@dataclass(frozen=True)
class Reset:
    targets: tuple[int, ...]


@dataclass(frozen=True)
class Depolarize1:
    p: float
    targets: tuple[int, ...]


@dataclass(frozen=True)
class Depolarize2:
    p: float
    pairs: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class BellPrep:
    pairs: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class MeasurePP:
    """Parallel Pauli-product measurements, one record per product.

    The recorded outcome of each product flips with probability flip_p.
    """

    flip_p: float
    products: tuple[tuple[tuple[int, str], ...], ...]


@dataclass(frozen=True)
class Detector:
    records: tuple[int, ...]
    face: int = -1
    anchor: int = -1


@dataclass(frozen=True)
class Observable:
    index: int
    records: tuple[int, ...]


@dataclass
class CircuitProgram:
    name: str
    n_qubits: int
    data_qubits: tuple[int, ...]
    bell_ancillas: tuple[tuple[int, int, int], ...]  # (edge id, a0, a1)
    instructions: tuple
    detectors: tuple[Detector, ...]
    observables: tuple[Observable, ...]
    n_records: int
    reference: Optional[np.ndarray] = field(default=None, compare=False, repr=False)
    metadata: dict = field(default_factory=dict, compare=False, repr=False)

    def measurement_index_ok(self) -> bool:
        for det in self.detectors:
            if any(r < 0 or r >= self.n_records for r in det.records):
                return False
        for obs in self.observables:
            if any(r < 0 or r >= self.n_records for r in obs.records):
                return False
        return True

    def ensure_reference(self) -> np.ndarray:
        if self.reference is None:
            self.reference = _reference_outcomes(self)[0]
        return self.reference

    @property
    def n_detectors(self) -> int:
        return len(self.detectors)

    @property
    def n_observables(self) -> int:
        return len(self.observables)


# ---------------------------------------------------------------------------
# logical observables from homology


@dataclass(frozen=True)
class LogicalOperatorSet:
    """Independent Z-type logical representatives as vertex-support rows."""

    supports: np.ndarray  # (2g, n_vertices) uint8
    genus: int

    def __len__(self) -> int:
        return self.supports.shape[0]


def _face_vertex_sets(lat: Lattice) -> list[set[int]]:
    out = []
    for f in lat.faces:
        verts: set[int] = set()
        for e in f.edges:
            verts.add(lat.edges[e].u)
            verts.add(lat.edges[e].v)
        out.append(verts)
    return out


def find_logical_observables(lat: Lattice) -> LogicalOperatorSet:
    """Basis of Z-type logical operators: vertex sets with even overlap with
    every X- and Y-type face, modulo the span of stabilizer-valued sets.

    Dimension must equal 2g or the lattice is rejected as corrupt.
    """
    validate_lattice(lat)
    n = lat.n_vertices
    face_sets = _face_vertex_sets(lat)

    def rows_for(face_color: int, edge_color: int) -> np.ndarray:
        rows = []
        for fi, f in enumerate(lat.faces):
            if f.color == face_color:
                r = np.zeros(n, dtype=np.uint8)
                r[list(face_sets[fi])] = 1
                rows.append(r)
        for e in lat.edges:
            if e.color == edge_color:
                r = np.zeros(n, dtype=np.uint8)
                r[e.u] = 1
                r[e.v] = 1
                rows.append(r)
        if not rows:
            return np.zeros((0, n), dtype=np.uint8)
        return np.array(rows, dtype=np.uint8)

    m01_rows = []
    for fi, f in enumerate(lat.faces):
        if f.color in (0, 1):
            r = np.zeros(n, dtype=np.uint8)
            r[list(face_sets[fi])] = 1
            m01_rows.append(r)
    M01 = (
        np.array(m01_rows, dtype=np.uint8)
        if m01_rows
        else np.zeros((0, n), dtype=np.uint8)
    )

    kernel = gf2.gf2_nullspace(M01)
    span_x = rows_for(0, 0)
    span_y = rows_for(1, 1)
    span_z = rows_for(2, 2)
    # stabilizer-valued Z-type sets: Z-colour faces and checks directly, plus
    # X-type and Y-type products that share a support (their product is Z-type)
    xy = gf2.gf2_intersection(span_x, span_y)
    trivial = gf2.gf2_rowspace_basis(np.vstack([span_z, xy]) if xy.size else span_z)
    for row in trivial:
        if not gf2.gf2_in_rowspace(row, kernel):
            raise CircuitError("stabilizer-valued set escapes the commutant kernel")
    reps = gf2.gf2_extend_basis(trivial, kernel)
    if reps.shape[0] != 2 * lat.genus:
        raise CircuitError(
            f"homology rank {reps.shape[0]} does not match 2g = {2 * lat.genus}; "
            "lattice is corrupt"
        )
    return LogicalOperatorSet(supports=reps, genus=lat.genus)


# ---------------------------------------------------------------------------
# compilation

_CODE = {"X": 1, "Z": 2, "Y": 3}


def _single_cluster_partition(lat: Lattice) -> Partition:
    return Partition(
        clusters=((frozenset(range(lat.n_vertices)), tuple(range(len(lat.edges)))),),
        nonlocal_edges=(),
        n_qpu=3 * lat.n_vertices,
    )


def build_memory_circuit(
    lattice: Lattice,
    partition: Optional[Partition],
    noise: NoiseParams,
    n_detector_rounds: int,
    basis: str = "Z",
) -> CircuitProgram:
    """Compile a Z-basis memory experiment over 6·n_detector_rounds sub-rounds."""
    if basis != "Z":
        raise CircuitError("only the Z memory basis is supported")
    if n_detector_rounds < 1:
        raise CircuitError("n_detector_rounds must be >= 1")
    validate_lattice(lattice)
    if partition is None:
        partition = _single_cluster_partition(lattice)
    validate_partition(lattice, partition)

    n_data = lattice.n_vertices
    nonlocal_set = set(partition.nonlocal_edges)

    bell_ancillas = []
    anc = {}
    next_q = n_data
    for e in sorted(nonlocal_set):
        anc[e] = (next_q, next_q + 1)
        bell_ancillas.append((e, next_q, next_q + 1))
        next_q += 2
    n_qubits = next_q

    edges_by_color: dict[int, list[int]] = {0: [], 1: [], 2: []}
    for i, e in enumerate(lattice.edges):
        edges_by_color[e.color].append(i)

    n_sub = 6 * n_detector_rounds
    instructions: list = []
    n_records = 0
    # per sub-round and edge: records whose XOR is the check value (two halves
    # for Bell-mediated checks), and the full record set entering stabilizer
    # inference (adds the Bell halves' closing X readouts)
    check_records: list[dict[int, list[int]]] = [dict() for _ in range(n_sub)]
    edge_records: list[dict[int, list[int]]] = [dict() for _ in range(n_sub)]

    def emit_mpp(flip_p, products):
        nonlocal n_records
        instructions.append(MeasurePP(flip_p, tuple(products)))
        first = n_records
        n_records += len(products)
        return list(range(first, n_records))

    all_data = tuple(range(n_data))
    instructions.append(Reset(all_data))
    if noise.p_local > 0:
        instructions.append(Depolarize1(noise.p_local, all_data))

    for s in range(n_sub):
        color = s % 3
        pauli = PAULI_OF_COLOR[color]
        local_edges = [e for e in edges_by_color[color] if e not in nonlocal_set]
        nl_edges = [e for e in edges_by_color[color] if e in nonlocal_set]

        if nl_edges:
            pairs = tuple(anc[e] for e in nl_edges)
            instructions.append(BellPrep(pairs))
            if noise.p_nonlocal > 0:
                instructions.append(Depolarize2(noise.p_nonlocal, pairs))

        if local_edges:
            pairs = tuple(
                (lattice.edges[e].u, lattice.edges[e].v) for e in local_edges
            )
            if noise.p_local > 0:
                instructions.append(Depolarize2(noise.p_local, pairs))
            prods = [
                ((lattice.edges[e].u, pauli), (lattice.edges[e].v, pauli))
                for e in local_edges
            ]
            recs = emit_mpp(noise.p_local, prods)
            for e, r in zip(local_edges, recs):
                check_records[s][e] = [r]
                edge_records[s][e] = []

        if nl_edges:
            u_pairs = tuple((lattice.edges[e].u, anc[e][0]) for e in nl_edges)
            v_pairs = tuple((lattice.edges[e].v, anc[e][1]) for e in nl_edges)
            if noise.p_local > 0:
                instructions.append(Depolarize2(noise.p_local, u_pairs))
            u_prods = [
                ((lattice.edges[e].u, pauli), (anc[e][0], "Z")) for e in nl_edges
            ]
            u_recs = emit_mpp(noise.p_local, u_prods)
            if noise.p_local > 0:
                instructions.append(Depolarize2(noise.p_local, v_pairs))
            v_prods = [
                ((lattice.edges[e].v, pauli), (anc[e][1], "Z")) for e in nl_edges
            ]
            v_recs = emit_mpp(noise.p_local, v_prods)
            # closing X readout of both Bell halves resolves the branch frame;
            # stabilizer inference needs these records, the check value does not
            anc_targets = tuple(a for e in nl_edges for a in anc[e])
            if noise.p_local > 0:
                instructions.append(Depolarize1(noise.p_local, anc_targets))
            x_prods = [((a, "X"),) for a in anc_targets]
            x_recs = emit_mpp(noise.p_local, x_prods)
            for i, e in enumerate(nl_edges):
                check_records[s][e] = [u_recs[i], v_recs[i]]
                edge_records[s][e] = [x_recs[2 * i], x_recs[2 * i + 1]]

        duration = noise.bell_wait_cycles if nl_edges else 1
        idle_layers = max(0, duration - 1)
        if noise.p_local > 0:
            for _ in range(idle_layers):
                instructions.append(Depolarize1(noise.p_local, all_data))

    if noise.p_local > 0:
        instructions.append(Depolarize1(noise.p_local, all_data))
    final_recs = emit_mpp(noise.p_local, [((q, "Z"),) for q in all_data])
    final_rec_of = {q: r for q, r in zip(all_data, final_recs)}

    logicals = find_logical_observables(lattice)
    observables = _track_observables(
        lattice, logicals, check_records, edge_records, final_rec_of, n_sub,
        nonlocal_set,
    )

    program = CircuitProgram(
        name=f"{lattice.name}-memZ-r{n_detector_rounds}",
        n_qubits=n_qubits,
        data_qubits=all_data,
        bell_ancillas=tuple(bell_ancillas),
        instructions=tuple(instructions),
        detectors=(),
        observables=tuple(observables),
        n_records=n_records,
        metadata={
            "lattice": lattice.name,
            "rounds": n_detector_rounds,
            "p_local": noise.p_local,
            "p_nonlocal": noise.p_nonlocal,
            "bell_wait_cycles": noise.bell_wait_cycles,
            "n_nonlocal_edges": len(nonlocal_set),
        },
    )

    reference, symbols = _reference_outcomes(program)
    program.reference = reference

    face_edges_by_color: list[dict[int, list[int]]] = []
    for f in lattice.faces:
        split: dict[int, list[int]] = {0: [], 1: [], 2: []}
        for e in f.edges:
            split[lattice.edges[e].color].append(e)
        face_edges_by_color.append(split)
    face_vertices = _face_vertex_sets(lattice)

    def minus_edges(fi: int) -> list[int]:
        c = lattice.faces[fi].color
        return face_edges_by_color[fi][(c - 1) % 3]

    def plus_edges(fi: int) -> list[int]:
        c = lattice.faces[fi].color
        return face_edges_by_color[fi][(c + 1) % 3]

    def detector_records(fi: int, s: int) -> list[int]:
        """Record set comparing the face's inference anchored at s with the
        previous one.  A Bell-mediated check leaves a branch Pauli on its data
        qubits that is resolved by the halves' X readouts; events whose branch
        flip falls between the two inferences contribute those records."""
        recs: list[int] = []
        if s >= 0:
            for e in minus_edges(fi):
                recs.extend(check_records[s][e])
        if s - 1 >= 0:
            for e in plus_edges(fi):
                recs.extend(check_records[s - 1][e])
                recs.extend(edge_records[s - 1][e])
        if s - 3 >= 0:
            for e in minus_edges(fi):
                recs.extend(check_records[s - 3][e])
                recs.extend(edge_records[s - 3][e])
        if s - 4 >= 0:
            for e in plus_edges(fi):
                recs.extend(check_records[s - 4][e])
        return recs

    detectors: list[Detector] = []
    for fi, f in enumerate(lattice.faces):
        c = f.color
        anchor0 = (c - 1) % 3
        for s in range(anchor0, n_sub, 3):
            recs = detector_records(fi, s)
            if not recs:
                continue
            if len(set(recs)) != len(recs):
                raise CircuitError("duplicate record in a detector")
            parity = Outcome(0, 0)
            for r in recs:
                parity = parity ^ symbols[r]
            if parity.mask == 0:
                detectors.append(Detector(tuple(sorted(recs)), face=fi, anchor=s))
            elif s - 4 >= 0:
                raise CircuitError(
                    f"bulk detector of face {fi} at sub-round {s} is not "
                    "deterministic; compilation bug"
                )
        if c == 2:
            # closing: compare the last complete inference against the
            # stabilizer value reconstructed from the transversal readout;
            # only the anchor-colour events' branch flips reach it oddly
            s_last = n_sub - 2
            recs = [final_rec_of[v] for v in face_vertices[fi]]
            for e in minus_edges(fi):
                recs.extend(check_records[s_last][e])
                recs.extend(edge_records[s_last][e])
            for e in plus_edges(fi):
                recs.extend(check_records[s_last - 1][e])
            parity = Outcome(0, 0)
            for r in recs:
                parity = parity ^ symbols[r]
            if parity.mask != 0:
                raise CircuitError(
                    f"closing detector of face {fi} is not deterministic"
                )
            detectors.append(Detector(tuple(sorted(recs)), face=fi, anchor=n_sub))

    detectors.sort(key=lambda d: (d.anchor, d.face))
    program.detectors = tuple(detectors)

    for obs in program.observables:
        parity = Outcome(0, 0)
        for r in obs.records:
            parity = parity ^ symbols[r]
        if parity.mask != 0:
            raise CircuitError(f"observable {obs.index} is not deterministic")

    if not program.measurement_index_ok():
        raise CircuitError("detector or observable references a missing record")
    return program


def _track_observables(
    lattice: Lattice,
    logicals: LogicalOperatorSet,
    check_records: list[dict[int, list[int]]],
    edge_records: list[dict[int, list[int]]],
    final_rec_of: dict[int, int],
    n_sub: int,
    nonlocal_set: set[int],
) -> list[Observable]:
    """Propagate each Z-type representative through the measurement schedule.

    A representative must commute with every upcoming pair measurement (both
    halves, for Bell-mediated checks) or the measurement would destroy it.
    Before each sub-round the representative is repaired by multiplying in
    operators whose values are already known: the previous sub-round's
    checks, face stabilizers with a completed inference, and (at time zero)
    Z-type operators fixed by the initialisation.  Every multiplication XORs
    the generator's records into the observable.  Before each Z sub-round
    the repair also forces the representative back to Z type so the final
    transversal readout can evaluate it.
    """
    n = lattice.n_vertices
    edges_by_color: dict[int, list[int]] = {0: [], 1: [], 2: []}
    for i, e in enumerate(lattice.edges):
        edges_by_color[e.color].append(i)
    face_vertices = _face_vertex_sets(lattice)
    face_edges_by_color: list[dict[int, list[int]]] = []
    for f in lattice.faces:
        split: dict[int, list[int]] = {0: [], 1: [], 2: []}
        for e in f.edges:
            split[lattice.edges[e].color].append(e)
        face_edges_by_color.append(split)

    def face_available(fi: int, s: int) -> bool:
        c = lattice.faces[fi].color
        if c == 2:
            return True
        return s >= (3 if c == 1 else 2) + 1

    def face_records(fi: int, s: int) -> list[int]:
        """Records whose XOR is the face stabilizer's value at repair time s.

        Uses the latest complete inference plus the Bell-branch X readouts of
        boundary events whose virtual flip lands between that inference and
        the repair; flips inside the inference window cancel pairwise.
        """
        c = lattice.faces[fi].color
        bm = face_edges_by_color[fi][(c - 1) % 3]
        bp = face_edges_by_color[fi][(c + 1) % 3]
        if c == 2 and s == 1:
            recs = []
            for e in bp:
                recs.extend(edge_records[0][e])
            return recs
        t = s - 1
        while t % 3 != (c - 1) % 3 or t < 1:
            t -= 1
            if t < 1:
                raise CircuitError("face stabilizer value requested too early")
        recs = []
        for e in bm:
            recs.extend(check_records[t][e])
            recs.extend(edge_records[t][e])
        for e in bp:
            recs.extend(check_records[t - 1][e])
        if (s - 1) % 3 == (c + 1) % 3:
            for e in bp:
                recs.extend(edge_records[s - 1][e])
        return recs

    # generator = (pauli codes per vertex, record supplier); values must be
    # known at the repair time: the previous sub-round's checks, inferred
    # face stabilizers, or (at time zero) operators fixed by initialisation
    def generators_for(s: int):
        gens: list[tuple[dict[int, int], tuple]] = []
        if s == 0:
            for fi, f in enumerate(lattice.faces):
                if f.color == 2:
                    gens.append(
                        ({q: _CODE["Z"] for q in face_vertices[fi]}, ("none",))
                    )
            for e in edges_by_color[2]:
                u, v = lattice.edges[e].u, lattice.edges[e].v
                gens.append(({u: _CODE["Z"], v: _CODE["Z"]}, ("none",)))
            return gens
        prev_color = (s - 1) % 3
        pcode = _CODE[PAULI_OF_COLOR[prev_color]]
        for e in edges_by_color[prev_color]:
            u, v = lattice.edges[e].u, lattice.edges[e].v
            gens.append(({u: pcode, v: pcode}, ("edge", e)))
        for fi, f in enumerate(lattice.faces):
            if face_available(fi, s):
                code = _CODE[PAULI_OF_COLOR[f.color]]
                gens.append(({q: code for q in face_vertices[fi]}, ("face", fi)))
        return gens

    def constraint_rows(s: int):
        # (qubit, pauli-code) half-constraints; local checks give one joint row
        rows: list[tuple[tuple[int, int], ...]] = []
        c = s % 3
        pcode = _CODE[PAULI_OF_COLOR[c]]
        for e in edges_by_color[c]:
            u, v = lattice.edges[e].u, lattice.edges[e].v
            if e in nonlocal_set:
                rows.append(((u, pcode),))
                rows.append(((v, pcode),))
            else:
                rows.append(((u, pcode), (v, pcode)))
        if s % 6 == 5:
            # the representative's form cycles with period 6; it can be forced
            # back to Z type only on every other Z sub-round, which is also
            # where the experiment ends (6R - 1 = 5 mod 6)
            for q in range(n):
                rows.append(((q, -1),))  # -1 marks an "x-part must vanish" row
        return rows

    def entry(code: int, marker: int) -> int:
        if marker == -1:
            return code & 1  # x bit
        return 0 if code in (0, marker) else 1

    solvers: dict[int, tuple] = {}

    def solver_for(s: int):
        key = s if s <= 3 else 4 + (s % 6)
        if key in solvers:
            return solvers[key]
        gens = generators_for(s)
        rows = constraint_rows(s)
        A = np.zeros((len(rows), len(gens)), dtype=np.uint8)
        for j, (codes, _) in enumerate(gens):
            for i, row in enumerate(rows):
                val = 0
                for q, marker in row:
                    val ^= entry(codes.get(q, 0), marker)
                if val:
                    A[i, j] = 1
        solver = (gf2.PackedGF2Solver(A), gens, rows)
        solvers[key] = solver
        return solver

    def gen_records(spec: tuple, s: int) -> list[int]:
        if spec[0] == "none":
            return []
        if spec[0] == "edge":
            return check_records[s - 1][spec[1]]
        if spec[0] == "face":
            return face_records(spec[1], s)
        raise CircuitError(f"unknown generator record spec {spec}")

    # The first six repairs interlock (early generators are scarce), so they
    # are solved jointly: choosing generator subsets r_0..r_5 is a triangular
    # GF(2) system because sub-round s only constrains r_0..r_s.
    window = min(6, n_sub)
    win_gens: list[tuple[int, dict[int, int], tuple]] = []
    for t in range(window):
        for codes, spec in generators_for(t):
            win_gens.append((t, codes, spec))
    win_rows: list[tuple[int, tuple]] = []
    for s in range(window):
        for row in constraint_rows(s):
            win_rows.append((s, row))
    A = np.zeros((len(win_rows), len(win_gens)), dtype=np.uint8)
    for j, (t, codes, _) in enumerate(win_gens):
        for i, (s, row) in enumerate(win_rows):
            if t > s:
                continue
            val = 0
            for q, marker in row:
                val ^= entry(codes.get(q, 0), marker)
            if val:
                A[i, j] = 1
    window_solver = gf2.PackedGF2Solver(A)

    observables = []
    for k in range(len(logicals)):
        op: dict[int, int] = {
            int(v): _CODE["Z"] for v in np.nonzero(logicals.supports[k])[0]
        }
        records: set[int] = set()

        b = np.zeros(len(win_rows), dtype=np.uint8)
        for i, (s, row) in enumerate(win_rows):
            val = 0
            for q, marker in row:
                val ^= entry(op.get(q, 0), marker)
            b[i] = val
        x = window_solver.solve(b)
        if x is None:
            raise CircuitError(
                f"observable {k} cannot be kept commuting through warmup"
            )
        for j in np.nonzero(x)[0]:
            t, codes, spec = win_gens[j]
            for q, code in codes.items():
                new = op.get(q, 0) ^ code
                if new:
                    op[q] = new
                else:
                    op.pop(q, None)
            records.symmetric_difference_update(gen_records(spec, t))

        for s in range(window, n_sub):
            solver, gens, rows = solver_for(s)
            b = np.zeros(len(rows), dtype=np.uint8)
            for i, row in enumerate(rows):
                val = 0
                for q, marker in row:
                    val ^= entry(op.get(q, 0), marker)
                b[i] = val
            if not b.any():
                continue
            x = solver.solve(b)
            if x is None:
                raise CircuitError(
                    f"observable {k} cannot be kept commuting at sub-round {s}"
                )
            for j in np.nonzero(x)[0]:
                codes, spec = gens[j]
                for q, code in codes.items():
                    new = op.get(q, 0) ^ code
                    if new:
                        op[q] = new
                    else:
                        op.pop(q, None)
                records.symmetric_difference_update(gen_records(spec, s))
        bad = [q for q, code in op.items() if code != _CODE["Z"]]
        if bad:
            raise CircuitError(
                f"observable {k} is not Z-type at readout (qubit {bad[0]})"
            )
        for q in op:
            records.symmetric_difference_update({final_rec_of[q]})
        observables.append(Observable(index=k, records=tuple(sorted(records))))
    return observables


# ---------------------------------------------------------------------------
# noiseless reference + determinism report


def _reference_outcomes(program: CircuitProgram):
    """Run the noiseless circuit symbolically; returns (reference bits, symbols)."""
    tab = SymbolicTableau(program.n_qubits)
    symbols: list[Outcome] = []
    for instr in program.instructions:
        if isinstance(instr, Reset):
            for q in instr.targets:
                tab.reset_z(q)
        elif isinstance(instr, BellPrep):
            for a, b in instr.pairs:
                tab.bell_prep(a, b)
        elif isinstance(instr, MeasurePP):
            for prod in instr.products:
                symbols.append(tab.measure(pack_pauli(program.n_qubits, dict(prod))))
        elif isinstance(instr, (Depolarize1, Depolarize2)):
            continue
        else:
            raise CircuitError(f"unknown instruction {instr!r}")
    if len(symbols) != program.n_records:
        raise CircuitError("record count mismatch while simulating")
    reference = np.array([s.bit for s in symbols], dtype=np.uint8)
    return reference, symbols


@dataclass(frozen=True)
class DeterminismReport:
    ok: bool
    failing_detectors: tuple[tuple[int, str], ...]
    failing_observables: tuple[tuple[int, str], ...]

    def __str__(self) -> str:
        if self.ok:
            return "determinism: PASS"
        lines = ["determinism: FAIL"]
        for i, why in self.failing_detectors:
            lines.append(f"  detector {i}: {why}")
        for i, why in self.failing_observables:
            lines.append(f"  observable {i}: {why}")
        return "\n".join(lines)


def validate_determinism(program: CircuitProgram) -> DeterminismReport:
    """Simulate the noiseless circuit and flag any detector whose parity is
    not deterministic and any observable whose value is not deterministic."""
    bad_d: list[tuple[int, str]] = []
    bad_o: list[tuple[int, str]] = []
    if not program.measurement_index_ok():
        return DeterminismReport(False, ((-1, "record index out of range"),), ())
    _, symbols = _reference_outcomes(program)
    for i, det in enumerate(program.detectors):
        parity = Outcome(0, 0)
        for r in det.records:
            parity = parity ^ symbols[r]
        if parity.mask != 0:
            bad_d.append((i, "parity depends on measurement randomness"))
    for obs in program.observables:
        parity = Outcome(0, 0)
        for r in obs.records:
            parity = parity ^ symbols[r]
        if parity.mask != 0:
            bad_o.append((obs.index, "value depends on measurement randomness"))
    return DeterminismReport(not bad_d and not bad_o, tuple(bad_d), tuple(bad_o))


# ---------------------------------------------------------------------------
# serialization


def circuit_to_text(program: CircuitProgram) -> str:
    lines = [
        f"CIRCUIT {program.name}",
        f"QUBITS {program.n_qubits}",
        "DATA " + " ".join(str(q) for q in program.data_qubits),
    ]
    for e, a0, a1 in program.bell_ancillas:
        lines.append(f"ANCILLA {e} {a0} {a1}")

    by_last: dict[int, list[Detector]] = {}
    for det in program.detectors:
        by_last.setdefault(max(det.records), []).append(det)

    rec = 0
    for instr in program.instructions:
        if isinstance(instr, Reset):
            lines.append("R " + " ".join(map(str, instr.targets)))
        elif isinstance(instr, Depolarize1):
            lines.append(f"DEP1 {instr.p!r} " + " ".join(map(str, instr.targets)))
        elif isinstance(instr, Depolarize2):
            lines.append(
                f"DEP2 {instr.p!r} " + " ".join(f"{a},{b}" for a, b in instr.pairs)
            )
        elif isinstance(instr, BellPrep):
            lines.append("BELLPREP " + " ".join(f"{a},{b}" for a, b in instr.pairs))
        elif isinstance(instr, MeasurePP):
            terms = []
            for prod in instr.products:
                terms.append("*".join(f"{p}{q}" for q, p in prod))
            lines.append(f"MPP {instr.flip_p!r} " + " ".join(terms))
            first = rec
            rec += len(instr.products)
            closing = []
            for r in range(first, rec):
                closing.extend(by_last.pop(r, []))
            for det in closing:
                offs = " ".join(str(r - rec) for r in det.records)
                lines.append(f"DETECTOR {det.face} {det.anchor} {offs}")
        else:
            raise CircuitError(f"cannot serialize {instr!r}")
    for obs in program.observables:
        offs = " ".join(str(r - rec) for r in obs.records)
        lines.append(f"OBSERVABLE {obs.index} {offs}")
    return "\n".join(lines) + "\n"


def parse_circuit(text: str) -> CircuitProgram:
    name = "parsed"
    n_qubits = 0
    data: tuple[int, ...] = ()
    ancillas: list[tuple[int, int, int]] = []
    instructions: list = []
    detectors: list[Detector] = []
    observables: list[Observable] = []
    rec = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        kind = tok[0]
        try:
            if kind == "CIRCUIT":
                name = tok[1]
            elif kind == "QUBITS":
                n_qubits = int(tok[1])
            elif kind == "DATA":
                data = tuple(int(x) for x in tok[1:])
            elif kind == "ANCILLA":
                ancillas.append((int(tok[1]), int(tok[2]), int(tok[3])))
            elif kind == "R":
                instructions.append(Reset(tuple(int(x) for x in tok[1:])))
            elif kind == "DEP1":
                instructions.append(
                    Depolarize1(float(tok[1]), tuple(int(x) for x in tok[2:]))
                )
            elif kind == "DEP2":
                pairs = tuple(
                    tuple(int(x) for x in t.split(",")) for t in tok[2:]
                )
                instructions.append(Depolarize2(float(tok[1]), pairs))
            elif kind == "BELLPREP":
                pairs = tuple(
                    tuple(int(x) for x in t.split(",")) for t in tok[1:]
                )
                instructions.append(BellPrep(pairs))
            elif kind == "MPP":
                prods = []
                for term in tok[2:]:
                    prod = []
                    for factor in term.split("*"):
                        prod.append((int(factor[1:]), factor[0]))
                    prods.append(tuple(prod))
                instructions.append(MeasurePP(float(tok[1]), tuple(prods)))
                rec += len(prods)
            elif kind == "DETECTOR":
                face, anchor = int(tok[1]), int(tok[2])
                records = tuple(sorted(rec + int(x) for x in tok[3:]))
                detectors.append(Detector(records, face=face, anchor=anchor))
            elif kind == "OBSERVABLE":
                records = tuple(sorted(rec + int(x) for x in tok[2:]))
                observables.append(Observable(int(tok[1]), records))
            else:
                raise ValueError(f"unknown record {kind!r}")
        except (IndexError, ValueError) as exc:
            raise CircuitError(f"circuit line {lineno}: {exc}") from exc
    detectors.sort(key=lambda d: (d.anchor, d.face))
    program = CircuitProgram(
        name=name,
        n_qubits=n_qubits,
        data_qubits=data,
        bell_ancillas=tuple(ancillas),
        instructions=tuple(instructions),
        detectors=tuple(detectors),
        observables=tuple(sorted(observables, key=lambda o: o.index)),
        n_records=rec,
    )
    if not program.measurement_index_ok():
        raise CircuitError("parsed circuit references a missing record")
    return program
