"""Testing anonymity: Eve's view must not depend on who the participants are.

Two harnesses:

* exact: walk every branch of a protocol phase (all measurement outcomes and
  random bits) and compare the resulting distributions of Eve's view, plus the
  classical-quantum state of Eve's qubits, across partitions;
* statistical: run many seeded ACKA simulations per partition and test the
  features of Eve's view for homogeneity across partitions.

Views keep real sender ids. For the exact harness the broadcast shuffle is not
branched on by default: it is an independent uniform permutation, so equal
sender-labelled distributions imply equal shuffled ones.

A colluder Eve's own broadcasts are dropped before comparison, since she
knows them already.
"""

from __future__ import annotations

import hashlib
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .adversary import HONEST, AdversarySpec, emit_source_state
from .ame import run_ame
from .net import BROADCAST, Eve, EveType, ModelError, Network, Partition, ProtocolAbort, extract_view
from .notification import notification_loop
from .orchestrator import AckaConfig, announce_validation, run_acka, run_round
from .qsim import CapacityError, reduced_density
from .rng import enumerate_branches
from .stats import homogeneity_p, mutual_information, total_variation, uniformity_p
from .verification import run_verification

EXACT_MAX_PARTIES = 4
PROB_TOL = 1e-12
STATE_TOL = 1e-10
P_THRESHOLD = 0.01
MI_THRESHOLD = 0.02
MIN_RUNS = 1000
JOINT_BINS = 16

PHASES = ("notification", "ame", "verification", "round")
ROLES = ("alice", "bob", "honest", "colluder")
# Eve type x role she tries to uncover; a colluder Eve knows the colluders.
EVE_ROLE_CELLS = tuple(
    (t, r) for t in (EveType.BOB, EveType.HONEST_NP, EveType.COLLUDERS) for r in ROLES
    if not (t is EveType.COLLUDERS and r == "colluder")
)


def role_set(partition: Partition, role: str) -> frozenset[int]:
    return {
        "alice": frozenset([partition.alice]),
        "bob": partition.bobs,
        "honest": partition.honest,
        "colluder": partition.colluders,
    }[role]


def consistent_partitions(
    n: int, m: int, eve: Eve, colluders: Iterable[int] = (), n_colluders: int | None = None
) -> list[Partition]:
    """Every partition that agrees with Eve's knowledge of her own role.

    For a non-colluder Eve the colluder set is ``colluders``, or every set of
    ``n_colluders`` parties other than Eve when that is given.
    """
    if eve.type is EveType.COLLUDERS:
        coll_sets = [eve.parties]
    elif n_colluders is not None:
        others = [p for p in range(n) if p not in eve.parties]
        coll_sets = [frozenset(c) for c in combinations(others, n_colluders)]
    else:
        coll_sets = [frozenset(colluders)]
    out = []
    for coll in coll_sets:
        pool = [p for p in range(n) if p not in coll]
        for alice in pool:
            rest = [p for p in pool if p != alice]
            for bobs in combinations(rest, m):
                part = Partition.build(n, alice, bobs, coll)
                try:
                    eve.check(part)
                except ModelError:
                    continue
                out.append(part)
    return out


def _view_key(view, eve: Eve, phase: str | None = None) -> tuple:
    evs, recs = view.key(drop_own_broadcasts=eve.type is EveType.COLLUDERS)
    if phase is not None:
        evs = tuple(e for e in evs if e[0] == phase)
        recs = tuple(r for r in recs if r[0] == phase)
    return evs, recs


@dataclass
class ExactDistribution:
    probs: dict[tuple, float]
    # per view: sum of p * (Eve's reduced density matrix), i.e. the cq state
    states: dict[tuple, np.ndarray] = field(default_factory=dict)
    leaves: int = 0

    def total(self) -> float:
        return sum(self.probs.values())


def exact_view_distribution(
    partition: Partition,
    eve: Eve,
    phase: str = "round",
    adversary: AdversarySpec | None = None,
    d_param: int = 2,
    target: int | None = None,
    shuffles: bool = False,
    max_parties: int = EXACT_MAX_PARTIES,
) -> ExactDistribution:
    """Exact distribution of Eve's view over one protocol phase.

    ``notification`` covers the loop for ``target``; ``ame`` one AME round;
    ``verification`` the verification round that follows AME (AME events are
    marginalized out); ``round`` AME, beacon, verification or key generation,
    and the round's validation bit.
    """
    if phase not in PHASES:
        raise ValueError(f"unknown phase {phase!r}")
    if partition.n > max_parties:
        raise CapacityError(f"exact enumeration is limited to {max_parties} parties")
    eve.check(partition)
    spec = adversary or HONEST
    spec.validate(partition)
    if phase == "notification" and target is None:
        raise ValueError("notification enumeration needs a target")
    n = partition.n

    def simulate(stream):
        net = Network(n)
        state = None
        try:
            if phase == "notification":
                notification_loop(target, partition, net, stream, spec.silent(partition))
            elif phase == "round":
                rec = run_round(0, partition, spec, net, stream, d_param)
                announce_validation(net, 1 if rec.accepted is None else rec.accepted, 0)
                state = rec.final_state
            else:
                ame = run_ame(emit_source_state(spec, partition), partition, spec, net, stream)
                state = ame.post_state
                if phase == "verification":
                    state = run_verification(state, partition, net, stream, adversary=spec).post_state
        except ProtocolAbort:
            state = None
        view = extract_view(net.transcript, eve.type, eve.parties)
        key = _view_key(view, eve, phase if phase == "verification" else None)
        rho = None if state is None else reduced_density(state, eve.parties)
        return key, rho

    probs: dict[tuple, float] = defaultdict(float)
    states: dict[tuple, np.ndarray] = {}
    leaves = 0
    for w, (key, rho) in enumerate_branches(simulate, shuffles=shuffles):
        leaves += 1
        probs[key] += w
        if rho is not None:
            states[key] = states[key] + w * rho if key in states else w * rho
    return ExactDistribution(dict(probs), states, leaves)


def compare_exact(a: ExactDistribution, b: ExactDistribution) -> tuple[float, float]:
    """(max probability difference, trace distance between the cq states)."""
    keys = set(a.probs) | set(b.probs)
    diff = max((abs(a.probs.get(k, 0.0) - b.probs.get(k, 0.0)) for k in keys), default=0.0)
    td = 0.0
    for k in set(a.states) | set(b.states):
        ra, rb = a.states.get(k), b.states.get(k)
        d = (ra if ra is not None else 0) - (rb if rb is not None else 0)
        td += 0.5 * float(np.abs(np.linalg.eigvalsh((d + np.conj(d).T) / 2)).sum())
    return diff, td


@dataclass
class ExactComparison:
    phase: str
    target: int | None
    first: Partition
    second: Partition
    prob_diff: float
    trace_distance: float

    @property
    def passed(self) -> bool:
        return self.prob_diff <= PROB_TOL and self.trace_distance <= STATE_TOL


@dataclass
class ExactReport:
    eve: Eve
    partitions: list[Partition]
    comparisons: list[ExactComparison]
    no_contrast: bool = False

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.comparisons)

    def to_lines(self) -> list[str]:
        lines = [f"mode=exact eve={self.eve} partitions={len(self.partitions)}"]
        if self.no_contrast:
            lines.append("verdict=NO-CONTRAST")
            return lines
        for ph in dict.fromkeys(c.phase for c in self.comparisons):
            cs = [c for c in self.comparisons if c.phase == ph]
            lines.append(
                f"phase={ph} pairs={len(cs)} max_prob_diff={max(c.prob_diff for c in cs):.3e} "
                f"max_trace_distance={max(c.trace_distance for c in cs):.3e} "
                f"result={'PASS' if all(c.passed for c in cs) else 'FAIL'}"
            )
        lines.append(f"verdict={'PASS' if self.passed else 'FAIL'}")
        return lines


def run_exact_experiment(
    partitions: Sequence[Partition],
    eve: Eve,
    adversary: AdversarySpec | None = None,
    phases: Sequence[str] = PHASES,
    d_param: int = 2,
    shuffles: bool = False,
    pairs: Sequence[tuple[int, int]] | None = None,
) -> ExactReport:
    """Compare exact view distributions for every pair (or the given index pairs)."""
    partitions = list(partitions)
    if len(partitions) < 2:
        return ExactReport(eve, partitions, [], no_contrast=True)
    n = partitions[0].n
    if any(p.n != n or p.m != partitions[0].m for p in partitions):
        raise ModelError("ensemble partitions must share n and m")
    for p in partitions:
        eve.check(p)
    pairs = list(pairs) if pairs is not None else list(combinations(range(len(partitions)), 2))
    comparisons = []
    for phase in phases:
        targets = range(n) if phase == "notification" else [None]
        for t in targets:
            dists = [
                exact_view_distribution(p, eve, phase, adversary, d_param, target=t, shuffles=shuffles)
                for p in partitions
            ]
            for i, j in pairs:
                diff, td = compare_exact(dists[i], dists[j])
                comparisons.append(ExactComparison(phase, t, partitions[i], partitions[j], diff, td))
    return ExactReport(eve, partitions, comparisons)


def view_features(view, eve: Eve) -> dict[tuple, object]:
    """Discrete features of one view: every bit position, per-sender counts and
    parities, broadcast slots, local records, and a hashed joint bin."""
    drop_own = eve.type is EveType.COLLUDERS
    feats: dict[tuple, object] = {}
    occ: Counter = Counter()
    groups: dict[tuple, list[int]] = {}
    slot_seen: dict[tuple, int] = {}
    for e in view.visible_events:
        if drop_own and e.kind == BROADCAST and e.sender in eve.parties:
            continue
        base = (e.phase, e.round, e.kind, e.sender, e.receiver)
        feats[("bit",) + base + (occ[base],)] = e.bit
        occ[base] += 1
        g = groups.setdefault((e.phase, e.round, e.kind, e.sender), [0, 0])
        g[0] += 1
        g[1] ^= e.bit
        if e.kind == BROADCAST:
            rk = (e.phase, e.round)
            if ("slot", rk, e.sender) not in feats:
                feats[("slot", rk, e.sender)] = slot_seen.get(rk, 0)
                slot_seen[rk] = slot_seen.get(rk, 0) + 1
    for k, (c, par) in groups.items():
        feats[("group",) + k] = (c, par)
    rocc: Counter = Counter()
    for r in view.records:
        base = (r.phase, r.round, r.party, r.label)
        feats[("rec",) + base + (rocc[base],)] = r.bit
        rocc[base] += 1
    digest = hashlib.blake2b(repr(_view_key(view, eve)).encode(), digest_size=8).digest()
    feats[("joint",)] = int.from_bytes(digest, "little") % JOINT_BINS
    return feats


@dataclass
class AnonymityExperiment:
    n: int
    m: int
    l_states: int
    d_param: int
    eves: Sequence[Eve]
    partitions: Sequence[Partition]
    runs_per_partition: int
    seed: int
    adversary: AdversarySpec | None = None
    sanity_leak: bool = False

    def __post_init__(self):
        if isinstance(self.eves, Eve):
            self.eves = (self.eves,)
        self.eves = tuple(self.eves)
        self.partitions = list(self.partitions)
        if self.runs_per_partition < MIN_RUNS:
            raise ValueError(f"need at least {MIN_RUNS} runs per partition")
        for p in self.partitions:
            if p.n != self.n or p.m != self.m:
                raise ModelError("all partitions must share n and m")
            for eve in self.eves:
                eve.check(p)


@dataclass
class AnonymityReport:
    eve: Eve
    n_partitions: int
    runs_per_partition: int
    homogeneity_p: float = 1.0
    worst_feature: tuple | None = None
    mi_bits: float = 0.0
    mi_feature: tuple | None = None
    tv_max: float = 0.0
    features_tested: int = 0
    marginal_min_p: float = 1.0
    nonuniform_positions: list[tuple] = field(default_factory=list)
    no_contrast: bool = False

    @property
    def passed(self) -> bool:
        if self.no_contrast:
            return True
        return self.homogeneity_p > P_THRESHOLD and self.mi_bits < MI_THRESHOLD

    def to_lines(self) -> list[str]:
        head = f"mode=statistical eve={self.eve} partitions={self.n_partitions} runs={self.runs_per_partition}"
        if self.no_contrast:
            return [head, "verdict=NO-CONTRAST"]
        return [
            head,
            f"features={self.features_tested}",
            f"homogeneity_p={self.homogeneity_p:.6g} worst_feature={_fmt_feature(self.worst_feature)}",
            f"mi_bits={self.mi_bits:.6g} mi_feature={_fmt_feature(self.mi_feature)}",
            f"tv_joint_max={self.tv_max:.6g}",
            f"marginal_min_p={self.marginal_min_p:.6g} nonuniform_positions={len(self.nonuniform_positions)}",
            f"verdict={'PASS' if self.passed else 'FAIL'}",
        ]


def _fmt_feature(f) -> str:
    return "-" if f is None else "/".join("-" if x is None else str(x) for x in f)


def collect_feature_counts(exp: AnonymityExperiment) -> dict[Eve, list[dict[tuple, Counter]]]:
    """Per Eve, per partition label: feature -> Counter of observed values."""
    counts = {eve: [defaultdict(Counter) for _ in exp.partitions] for eve in exp.eves}
    for label, part in enumerate(exp.partitions):
        config = AckaConfig(
            exp.n, exp.m, exp.l_states, exp.d_param, exp.seed,
            adversary=exp.adversary or AdversarySpec(), partition=part, sanity_leak=exp.sanity_leak,
        )
        for r in range(exp.runs_per_partition):
            _, transcript = run_acka(config, run_index=label * exp.runs_per_partition + r)
            for eve in exp.eves:
                view = extract_view(transcript, eve.type, eve.parties)
                table = counts[eve][label]
                for k, v in view_features(view, eve).items():
                    table[k][v] += 1
    return counts


def analyze_counts(eve: Eve, per_label: list[dict[tuple, Counter]], runs: int) -> AnonymityReport:
    report = AnonymityReport(eve, len(per_label), runs)
    if len(per_label) < 2:
        report.no_contrast = True
        return report
    features = set().union(*(set(t) for t in per_label))
    tested = []
    worst_p, worst_f, best_mi, mi_f = 1.0, None, 0.0, None
    for f in sorted(features, key=repr):
        values = sorted(set().union(*(set(t.get(f, {})) for t in per_label)), key=repr)
        rows = []
        for t in per_label:
            c = t.get(f, Counter())
            present = [c.get(v, 0) for v in values]
            rows.append(present + [runs - sum(present)])
        table = np.array(rows)
        table = table[:, table.sum(axis=0) > 0]
        if table.shape[1] < 2:
            continue
        tested.append(f)
        p = homogeneity_p(table)
        if p < worst_p or worst_f is None:
            worst_p, worst_f = p, f
        mi = mutual_information(table)
        if mi > best_mi or mi_f is None:
            best_mi, mi_f = mi, f
        if f[0] == "bit" and set(values) <= {0, 1}:
            pooled = table[:, : len(values)].sum(axis=0)
            up = uniformity_p(pooled) if len(values) == 2 else 0.0
            report.marginal_min_p = min(report.marginal_min_p, up)
            if up < P_THRESHOLD:
                report.nonuniform_positions.append(f)
    report.features_tested = len(tested)
    report.homogeneity_p = min(1.0, worst_p * max(1, len(tested)))
    report.worst_feature = worst_f
    report.mi_bits = best_mi
    report.mi_feature = mi_f
    joint = []
    for t in per_label:
        c = t.get(("joint",), Counter())
        tot = sum(c.values())
        joint.append({k: v / tot for k, v in c.items()} if tot else {})
    report.tv_max = max((total_variation(a, b) for a, b in combinations(joint, 2)), default=0.0)
    return report


def run_experiment(exp: AnonymityExperiment) -> list[AnonymityReport]:
    """One report per Eve of the experiment."""
    if len(exp.partitions) < 2:
        return [AnonymityReport(e, len(exp.partitions), exp.runs_per_partition, no_contrast=True) for e in exp.eves]
    counts = collect_feature_counts(exp)
    return [analyze_counts(eve, counts[eve], exp.runs_per_partition) for eve in exp.eves]
