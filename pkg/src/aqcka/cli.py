"""Command-line front end.

    aqcka run --n 4 --m 2 --l-states 50 --d-param 5 --seed 7 --runs 3
    aqcka anonymity --n 3 --m 1 --eve honest-np:2 --exact
    aqcka oracle-suite

Every flag may also be given in a ``--config`` file of ``key = value`` lines
(``#`` starts a comment, dashes and underscores are interchangeable, adversary
settings use dotted keys such as ``adversary.source = eq2-orthogonal``). Flags
override the file.

Exit codes: 0 success, 1 an oracle failed, 2 bad configuration, 3 an anonymity
experiment failed its thresholds.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .adversary import SOURCES, AdversarySpec, Behavior, UnitaryAction
from .anonymity import (
    EXACT_MAX_PARTIES,
    MIN_RUNS,
    AnonymityExperiment,
    consistent_partitions,
    run_exact_experiment,
    run_experiment,
)
from .net import Eve, EveType, ModelError, Partition
from .orchestrator import AckaConfig, key_rate, run_acka
from .qsim import CapacityError, StateVector, tensor
from .rng import check_seed

EXIT_OK, EXIT_ORACLE, EXIT_CONFIG, EXIT_ANON_FAIL = 0, 1, 2, 3

INT_KEYS = {
    "n", "m", "l_states", "d_param", "seed", "runs", "jobs", "alice",
    "max_qubits", "failure_threshold", "partitions",
}
BOOL_KEYS = {"exact", "sanity_leak"}
STR_KEYS = {"eve", "output", "format", "transcripts", "bobs", "adversary"}
DEFAULTS = {
    "l_states": 1, "d_param": 2, "runs": None, "jobs": 1, "format": "lines",
    "max_qubits": 16, "failure_threshold": 0, "partitions": 4,
    "exact": False, "sanity_leak": False,
}
# documented field order of one run record
RUN_FIELDS = (
    "run", "seed", "n", "m", "l_states", "d_param", "alice", "bobs", "colluders",
    "aborted", "alice_validates", "verification_rounds", "verification_failures",
    "keygen_rounds", "key_rate", "keys_agree", "keys",
)


class ConfigError(ValueError):
    pass


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def _coerce(key: str, value):
    if key in INT_KEYS:
        try:
            return int(value)
        except ValueError:
            raise ConfigError(f"{key} expects an integer, got {value!r}") from None
    if key in BOOL_KEYS:
        return value if isinstance(value, bool) else _bool(value)
    if key in STR_KEYS:
        return str(value)
    raise ConfigError(f"unknown setting {key!r}")


def read_config(path: str) -> tuple[dict, dict]:
    """Settings and dotted adversary keys from a ``key = value`` file."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from None
    settings, adversary = {}, {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key = key.strip().replace("-", "_")
        value = value.strip()
        if key.startswith("adversary."):
            adversary[key[len("adversary."):]] = value
        else:
            settings[key] = _coerce(key, value)
    return settings, adversary


def parse_kv_list(text: str) -> dict[str, str]:
    """``a=1,b=2,3`` -> ``{"a": "1", "b": "2,3"}``: bare tokens continue the previous value."""
    out: dict[str, str] = {}
    last = None
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        key, sep, value = tok.partition("=")
        if sep:
            last = key.strip()
            out[last] = value.strip()
        elif last is None:
            raise ConfigError(f"adversary token {tok!r} has no key")
        else:
            out[last] += "," + tok
    return out


def _ids(text: str) -> list[int]:
    try:
        return [int(t) for t in text.replace("+", ",").split(",") if t.strip()]
    except ValueError:
        raise ConfigError(f"expected comma-separated party ids, got {text!r}") from None


_PRODUCT = {
    "0": [1, 0],
    "1": [0, 1],
    "+": [2**-0.5, 2**-0.5],
    "-": [2**-0.5, -(2**-0.5)],
}


def _product_state(text: str) -> StateVector:
    """Product state from characters 0, 1, +, -; character j sets qubit j."""
    try:
        return tensor(*(StateVector.from_amplitudes(_PRODUCT[c]) for c in text))
    except KeyError:
        raise ConfigError(f"colluder state {text!r} must use the characters 0 1 + -") from None


def build_adversary(fields: dict[str, str]) -> AdversarySpec:
    kw: dict = {"overrides": {}}
    unitaries = []
    for key, value in fields.items():
        if key == "source":
            if value not in SOURCES:
                raise ConfigError(f"unknown source {value!r}; choose from {', '.join(SOURCES)}")
            kw["source"] = value
        elif key == "colluders":
            kw["colluders"] = frozenset(_ids(value))
        elif key == "behavior":
            kw["behavior"] = Behavior.parse(value)
        elif key.startswith("behavior."):
            kw["overrides"][int(key.split(".", 1)[1])] = Behavior.parse(value)
        elif key in ("psi", "phi"):
            kw[key] = _product_state(value)
        elif key == "unitary":
            # gate@qubit items, e.g. Z@3,H@2
            for item in value.split(","):
                gate, _, q = item.partition("@")
                try:
                    unitaries.append(UnitaryAction.gate(gate.strip(), int(q)))
                except ValueError:
                    raise ConfigError(f"bad unitary {item!r}, expected GATE@qubit") from None
        else:
            raise ConfigError(f"unknown adversary key {key!r}")
    kw["unitaries"] = tuple(unitaries)
    return AdversarySpec(**kw)


def _parent() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    p.add_argument("--config", help="key = value settings file; flags override it")
    p.add_argument("--n", type=int, help="number of parties")
    p.add_argument("--m", type=int, help="number of Bobs")
    p.add_argument("--l-states", dest="l_states", type=int, help="GHZ states per run")
    p.add_argument("--d-param", dest="d_param", type=int, help="beacon parameter D")
    p.add_argument("--seed", type=int, help="64-bit master seed")
    p.add_argument("--runs", type=int)
    p.add_argument("--jobs", type=int)
    p.add_argument("--adversary", help="key=val,... (source, colluders, behavior, behavior.ID, psi, phi, unitary)")
    p.add_argument("--eve", help="TYPE:ID[,ID...] with TYPE in bob, honest-np, colluders")
    p.add_argument("--output", help="output file (default stdout)")
    p.add_argument("--format", choices=("lines", "csv"))
    p.add_argument("--exact", action="store_const", const=True)
    p.add_argument("--alice", type=int)
    p.add_argument("--bobs", help="comma-separated Bob ids")
    p.add_argument("--transcripts", help="directory for per-run transcript files")
    p.add_argument("--max-qubits", dest="max_qubits", type=int)
    p.add_argument("--failure-threshold", dest="failure_threshold", type=int)
    p.add_argument("--partitions", type=int, help="ensemble size for statistical anonymity")
    p.add_argument("--sanity-leak", dest="sanity_leak", action="store_const", const=True,
                   help="deliberately leak participant draws (harness sensitivity check)")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="aqcka", description="Anonymous conference key agreement simulator")
    sub = parser.add_subparsers(dest="command", required=True)
    parent = _parent()
    sub.add_parser("run", parents=[parent], help="simulate ACKA runs")
    sub.add_parser("anonymity", parents=[parent], help="test Eve's view for partition independence")
    sub.add_parser("oracle-suite", parents=[parent], help="run the enumeration oracles")
    return parser


def resolve(ns: argparse.Namespace) -> tuple[dict, dict]:
    """Merge defaults, config file and flags (in that order of precedence)."""
    flags = vars(ns).copy()
    command = flags.pop("command")
    settings = dict(DEFAULTS)
    adversary: dict[str, str] = {}
    if "config" in flags:
        file_settings, adversary = read_config(flags.pop("config"))
        settings.update(file_settings)
    if "adversary" in settings:
        adversary.update(parse_kv_list(settings.pop("adversary")))
    if "adversary" in flags:
        adversary.update(parse_kv_list(flags.pop("adversary")))
    settings.update(flags)
    settings["command"] = command
    return settings, adversary


def _need(settings: dict, *keys: str) -> None:
    missing = [k for k in keys if settings.get(k) is None]
    if missing:
        raise ConfigError("missing required setting(s): " + ", ".join("--" + k.replace("_", "-") for k in missing))


def write_atomic(path: str, text: str) -> None:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(settings: dict, text: str) -> None:
    if settings.get("output"):
        write_atomic(settings["output"], text)
    else:
        sys.stdout.write(text)


def _records_text(records: list[dict], fields, fmt: str) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=list(fields), lineterminator="\n")
        w.writeheader()
        w.writerows(records)
        return buf.getvalue()
    return "".join(" ".join(f"{k}={r[k]}" for k in fields) + "\n" for r in records)


def _lines_text(lines: list[str], fmt: str) -> str:
    """Report lines of ``key=value`` tokens; CSV flattens them to (line, key, value)."""
    if fmt != "csv":
        return "".join(line + "\n" for line in lines)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["line", "key", "value"])
    for i, line in enumerate(lines):
        for tok in line.split():
            k, _, v = tok.partition("=")
            w.writerow([i, k, v])
    return buf.getvalue()


def _make_config(settings: dict, adversary: AdversarySpec) -> AckaConfig:
    _need(settings, "n", "m", "seed")
    partition = None
    if settings.get("alice") is not None or settings.get("bobs") is not None:
        _need(settings, "alice", "bobs")
        bobs = _ids(settings["bobs"])
        partition = Partition.build(settings["n"], settings["alice"], bobs, adversary.colluders or ())
    return AckaConfig(
        settings["n"], settings["m"], settings["l_states"], settings["d_param"], check_seed(settings["seed"]),
        adversary=adversary, max_qubits=settings["max_qubits"], partition=partition,
        failure_threshold=settings["failure_threshold"], sanity_leak=settings["sanity_leak"],
    )


def _run_one(job: tuple[AckaConfig, int, bool]) -> tuple[dict, list[str] | None]:
    config, run_index, keep = job
    outcome, transcript = run_acka(config, run_index)
    keys = outcome.key_bits
    part = config.partition
    rec = {
        "run": run_index,
        "seed": config.seed,
        "n": config.n,
        "m": config.m,
        "l_states": config.l_states,
        "d_param": config.d_param,
        "alice": part.alice,
        "bobs": ",".join(map(str, sorted(part.bobs))) or "-",
        "colluders": ",".join(map(str, sorted(part.colluders))) or "-",
        "aborted": outcome.aborted,
        "alice_validates": outcome.alice_validates,
        "verification_rounds": outcome.verification_rounds,
        "verification_failures": outcome.verification_failures,
        "keygen_rounds": outcome.keygen_rounds,
        "key_rate": "-" if outcome.aborted else f"{key_rate(outcome):.6f}",
        "keys_agree": int(len(set(keys.values())) == 1),
        "keys": "|".join(f"{p}:{k or '-'}" for p, k in sorted(keys.items())),
    }
    return rec, (transcript.to_lines() if keep else None)


def cmd_run(settings: dict, adversary: AdversarySpec) -> int:
    config = _make_config(settings, adversary)
    runs = settings["runs"] if settings["runs"] is not None else 1
    if runs < 1 or settings["jobs"] < 1:
        raise ConfigError("--runs and --jobs must be positive")
    keep = bool(settings.get("transcripts"))
    jobs = [(config, r, keep) for r in range(runs)]
    if settings["jobs"] > 1 and runs > 1:
        with ProcessPoolExecutor(settings["jobs"]) as pool:
            results = list(pool.map(_run_one, jobs, chunksize=max(1, runs // (4 * settings["jobs"]))))
    else:
        results = [_run_one(j) for j in jobs]
    if keep:
        for rec, lines in results:
            write_atomic(os.path.join(settings["transcripts"], f"run-{rec['run']:06d}.tsv"),
                         "".join(line + "\n" for line in lines))
    _emit(settings, _records_text([r for r, _ in results], RUN_FIELDS, settings["format"]))
    return EXIT_OK


def _eve_and_adversary(settings: dict, adversary: AdversarySpec) -> tuple[Eve, AdversarySpec]:
    _need(settings, "n", "m", "eve")
    eve = Eve.parse(settings["eve"])
    if eve.type is EveType.COLLUDERS:
        if adversary.colluders is not None and adversary.colluders != eve.parties:
            raise ConfigError("a colluder Eve must control exactly the adversary's colluders")
        adversary.colluders = eve.parties
    return eve, adversary


def _ensemble(settings, eve, adversary) -> list[Partition]:
    parts = consistent_partitions(settings["n"], settings["m"], eve, adversary.colluders or ())
    for p in parts:
        adversary.validate(p)
    return parts


def cmd_anonymity(settings: dict, adversary: AdversarySpec) -> int:
    eve, adversary = _eve_and_adversary(settings, adversary)
    if settings["n"] > settings["max_qubits"]:
        raise CapacityError(f"{settings['n']} parties exceed the {settings['max_qubits']}-qubit limit")
    if settings["exact"]:
        if settings["n"] > EXACT_MAX_PARTIES:
            raise CapacityError(f"exact enumeration supports at most {EXACT_MAX_PARTIES} parties")
        parts = _ensemble(settings, eve, adversary)
        report = run_exact_experiment(parts, eve, adversary, d_param=settings["d_param"])
        lines, passed = report.to_lines(), report.passed
    else:
        _need(settings, "seed")
        runs = settings["runs"] if settings["runs"] is not None else MIN_RUNS
        parts = _ensemble(settings, eve, adversary)
        k = min(settings["partitions"], len(parts))
        if k >= 2:
            # evenly spaced picks keep the ensemble independent of the seed
            parts = [parts[round(i * (len(parts) - 1) / (k - 1))] for i in range(k)]
        exp = AnonymityExperiment(
            settings["n"], settings["m"], settings["l_states"], settings["d_param"], [eve], parts,
            runs, check_seed(settings["seed"]), adversary, settings["sanity_leak"],
        )
        (report,) = run_experiment(exp)
        lines = report.to_lines()
        lines.insert(1, "ensemble=" + ";".join(p.label() for p in parts))
        passed = report.passed
    _emit(settings, _lines_text(lines, settings["format"]))
    return EXIT_OK if passed else EXIT_ANON_FAIL


def cmd_oracle_suite(settings: dict, _adversary) -> int:
    from .oracles import run_oracle_suite

    results = run_oracle_suite()
    _emit(settings, _lines_text([r.line() for r in results], settings["format"]))
    return EXIT_OK if all(r.passed for r in results) else EXIT_ORACLE


COMMANDS = {"run": cmd_run, "anonymity": cmd_anonymity, "oracle-suite": cmd_oracle_suite}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors with code 2
        return int(exc.code or 0)
    try:
        settings, adv_fields = resolve(ns)
        adversary = build_adversary(adv_fields)
        return COMMANDS[settings["command"]](settings, adversary)
    except (ConfigError, ModelError, CapacityError, ValueError) as exc:
        print(f"aqcka: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
