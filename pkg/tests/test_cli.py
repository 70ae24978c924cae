import csv
import io

import pytest

from aqcka.cli import RUN_FIELDS, ConfigError, build_adversary, main, parse_kv_list, read_config

RUN = ["run", "--n", "4", "--m", "2", "--l-states", "30", "--d-param", "3", "--seed", "7"]


def read(path):
    return path.read_bytes()


def test_run_writes_one_line_per_run(tmp_path):
    out = tmp_path / "runs.txt"
    assert main(RUN + ["--runs", "3", "--output", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 3
    first = dict(tok.split("=", 1) for tok in lines[0].split())
    assert list(first) == list(RUN_FIELDS)
    assert first["keys_agree"] == "1" and first["aborted"] == "0"


def test_run_is_byte_identical_and_job_independent(tmp_path):
    a, b, c = tmp_path / "a", tmp_path / "b", tmp_path / "c"
    main(RUN + ["--runs", "4", "--output", str(a)])
    main(RUN + ["--runs", "4", "--output", str(b)])
    main(RUN + ["--runs", "4", "--jobs", "2", "--output", str(c)])
    assert read(a) == read(b) == read(c)


def test_config_file_equivalent_to_flags(tmp_path):
    cfg = tmp_path / "c.conf"
    cfg.write_text("# comment\nn = 4\nm = 2\nl-states = 30\nd_param = 3\nseed = 7  # trailing\n")
    a, b = tmp_path / "a", tmp_path / "b"
    main(RUN + ["--output", str(a)])
    main(["run", "--config", str(cfg), "--output", str(b)])
    assert read(a) == read(b)
    c = tmp_path / "c"
    main(["run", "--config", str(cfg), "--seed", "8", "--output", str(c)])
    assert "seed=8" in c.read_text()


def test_adversary_in_config_and_flags(tmp_path):
    cfg = tmp_path / "adv.conf"
    cfg.write_text("adversary.source = eq2-orthogonal\nadversary.colluders = 3\n")
    a, b = tmp_path / "a", tmp_path / "b"
    main(RUN + ["--config", str(cfg), "--output", str(a)])
    main(RUN + ["--adversary", "source=eq2-orthogonal,colluders=3", "--output", str(b)])
    assert read(a) == read(b)
    assert "colluders=3" in a.read_text()


def test_csv_format(tmp_path):
    out = tmp_path / "r.csv"
    main(RUN + ["--runs", "2", "--format", "csv", "--output", str(out)])
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    assert len(rows) == 2 and rows[1]["run"] == "1"


def test_transcripts_exported(tmp_path):
    main(RUN + ["--runs", "2", "--transcripts", str(tmp_path / "t"), "--output", str(tmp_path / "o")])
    files = sorted((tmp_path / "t").iterdir())
    assert [f.name for f in files] == ["run-000000.tsv", "run-000001.tsv"]
    assert files[0].read_text().split("\t")[1] == "notification"


def test_explicit_partition(tmp_path):
    out = tmp_path / "o"
    main(RUN + ["--alice", "3", "--bobs", "0,2", "--output", str(out)])
    assert "alice=3 bobs=0,2" in out.read_text()


@pytest.mark.parametrize(
    "argv",
    [
        RUN + ["--bogus"],
        ["run", "--n", "4", "--m", "2"],  # no seed
        ["run", "--n", "20", "--m", "1", "--seed", "1"],
        RUN + ["--adversary", "source=laser"],
        RUN + ["--alice", "0", "--bobs", "1,2", "--adversary", "colluders=1"],
        ["run", "--config", "/nonexistent/file.conf"],
        ["anonymity", "--n", "5", "--m", "1", "--eve", "honest-np:4", "--exact"],
        ["anonymity", "--n", "4", "--m", "1", "--eve", "honest-np:3"],  # statistical needs a seed
    ],
)
def test_config_errors_exit_two(argv, capsys):
    assert main(argv) == 2
    assert "error" in capsys.readouterr().err


def test_default_partition_steers_around_colluders(tmp_path):
    out = tmp_path / "o"
    assert main(RUN + ["--adversary", "colluders=1", "--output", str(out)]) == 0
    assert "alice=0 bobs=2,3 colluders=1" in out.read_text()


def test_anonymity_exact_pass(capsys):
    assert main(["anonymity", "--n", "3", "--m", "1", "--eve", "honest-np:2", "--exact"]) == 0
    assert capsys.readouterr().out.strip().endswith("verdict=PASS")


def test_anonymity_failure_exits_three(tmp_path):
    out = tmp_path / "rep"
    argv = ["anonymity", "--n", "4", "--m", "1", "--eve", "honest-np:3", "--seed", "3", "--runs", "1000",
            "--partitions", "2", "--sanity-leak", "--output", str(out)]
    assert main(argv) == 3
    assert "verdict=FAIL" in out.read_text()


def test_kv_parsing():
    assert parse_kv_list("source=eq2-equal,colluders=2,3,behavior=skip-one") == {
        "source": "eq2-equal", "colluders": "2,3", "behavior": "skip-one"
    }
    with pytest.raises(ConfigError):
        parse_kv_list("2,3")
    spec = build_adversary({"colluders": "2,3", "behavior.3": "skip-one", "unitary": "Z@2,H@3"})
    assert spec.colluders == frozenset([2, 3]) and len(spec.unitaries) == 2
    with pytest.raises(ConfigError):
        build_adversary({"unitary": "Z3"})
    with pytest.raises(ConfigError):
        build_adversary({"mood": "grumpy"})


def test_read_config_rejects_unknown_keys(tmp_path):
    p = tmp_path / "x.conf"
    p.write_text("colour = blue\n")
    with pytest.raises(ConfigError):
        read_config(str(p))
    p.write_text("just words\n")
    with pytest.raises(ConfigError):
        read_config(str(p))
