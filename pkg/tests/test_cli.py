import csv
import io
import shlex

import pytest

from spherical_pi import __version__
from spherical_pi.cli import RunConfig, format_alpha, main, parse_alpha, parse_resolutions, UsageError

SMALL = ["--res", "8:16,10:20,12:24"]


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def table(text):
    meta = [ln for ln in text.splitlines() if ln.startswith("#")]
    rows = list(csv.reader(io.StringIO("\n".join(ln for ln in text.splitlines()
                                                 if not ln.startswith("#")))))
    return meta, rows[0], rows[1:]


@pytest.mark.parametrize("text,value", [("0.5", 0.5), ("0.3+0.2i", 0.3 + 0.2j),
                                        ("0.3-0.2i", 0.3 - 0.2j), ("0.5i", 0.5j),
                                        ("-i", -1j), ("i", 1j), ("1e-1+2e-1i", 0.1 + 0.2j)])
def test_parse_alpha(text, value):
    assert parse_alpha(text) == value
    assert parse_alpha(format_alpha(value)) == value


@pytest.mark.parametrize("text", ["", "0.3 + 0.2i", "0.3+0.2j", "abc", "0.3+", "+i+i"])
def test_parse_alpha_rejects(text):
    with pytest.raises(UsageError):
        parse_alpha(text)


def test_parse_resolutions():
    assert parse_resolutions("16:32,24:48") == [(16, 32), (24, 48)]
    for bad in ("16x32", "1:32", "16:32,"):
        with pytest.raises(UsageError):
            parse_resolutions(bad)


def test_usage_errors_exit_2(capsys):
    assert run(capsys, "beltrami", "--q-norms", "1.2")[0] == 2
    assert run(capsys, "verify", "--alpha", "0.5+0.1j")[0] == 2
    assert run(capsys, "kernel", "--unknown-flag")[0] == 2
    assert run(capsys, "bogus")[0] == 2
    assert run(capsys, "info", "--cap-angle", "200")[0] == 2


def test_info_echoes_every_flag(capsys):
    code, out, _ = run(capsys, "info", "--alpha", "0.3+0.2i", "--seed", "7")
    assert code == 0 and __version__ in out
    for flag in ("--alpha", "--cap-angle", "--res", "--eps", "--pv-eps", "--max-terms",
                 "--series-tol", "--fp-tol", "--max-iter", "--seed", "--deterministic"):
        assert flag in out
    assert "--alpha 0.3+0.2i" in out and "--seed 7" in out


def test_kernel_table(capsys):
    code, out, _ = run(capsys, "kernel", "--deterministic", "--points", "12")
    assert code == 0
    meta, header, rows = table(out)
    assert any("tool: spherical-pi" in m for m in meta)
    assert header[:3] == ["z", "re_scalar", "im_scalar"] and header[-2:] == ["terms_used", "converged"]
    assert len(rows) == 12
    terms = [int(r[-2]) for r in rows]
    assert terms == sorted(terms) and terms[-1] > terms[0]


def test_kernel_empty_range(capsys):
    code, out, _ = run(capsys, "kernel", "--t-range", "0.5:0.1")
    meta, header, rows = table(out)
    assert code == 0 and rows == [] and header[0] == "z"


def test_kernel_integer_alpha_is_a_pole(capsys):
    code, _, err = run(capsys, "kernel", "--alpha", "1")
    assert code == 1 and "pole" in err


def test_metadata_reproduces_run(capsys):
    code, out, _ = run(capsys, "kernel", "--alpha", "0.3-0.2i", "--points", "3", "--deterministic")
    argv = next(m for m in out.splitlines() if m.startswith("# argv: ")).split(" ", 2)[2]
    again = shlex.split(argv)[1:]
    code2, out2, _ = run(capsys, *again)
    assert code == code2 == 0 and out == out2


def test_verify_is_deterministic_and_complete(capsys, tmp_path):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for p in paths:
        run(capsys, "verify", "--deterministic", *SMALL, "--out", str(p))
    a, b = (p.read_bytes() for p in paths)
    assert a == b
    _, header, rows = table(a.decode())
    assert header[0] == "identity"
    per_level = {}
    for r in rows:
        per_level[r[3]] = per_level.get(r[3], 0) + 1
    assert len(per_level) == 3 and min(per_level.values()) >= 15


def test_verify_without_deterministic_stamps_time(capsys, tmp_path):
    # the timestamp is the only run-dependent line
    p = tmp_path / "k.csv"
    run(capsys, "kernel", "--points", "2", "--out", str(p))
    assert "# created:" in p.read_text()


def test_bvp_command(capsys):
    code, out, err = run(capsys, "bvp", "--deterministic", "--res", "8:16,10:20,12:24")
    _, header, rows = table(out)
    assert code == 0 and len(rows) == 6 and header[0] == "case"


def test_beltrami_command(capsys):
    code, out, _ = run(capsys, "beltrami", "--deterministic", "--res", "8:16",
                       "--q-norms", "0,0.3")
    _, header, rows = table(out)
    assert code == 0 and header[0] == "q_norm"
    zero = next(r for r in rows if float(r[0]) == 0)
    assert int(zero[3]) <= 2 and float(zero[6]) <= 1e-8


def test_beltrami_divergence_exit_1(capsys):
    code, _, err = run(capsys, "beltrami", "--res", "8:16", "--q-norms", "0.9")
    assert code == 1 and "not contracting" in err


def test_run_config_argv_round_trip():
    cfg = RunConfig("verify", 0.5j, 45.0, [(8, 16)], None, 0.01, 300, 1e-15, 1e-9, 50, 3, True,
                    "-", [0.1], (-0.5, 0.5), 5)
    text = cfg.argv()
    assert "--alpha 0.0+0.5i" in text and "--pv-eps 0.01" in text and "--deterministic" in text
    assert "--eps" not in text.replace("--pv-eps", "")
