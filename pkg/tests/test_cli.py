"""Command line driver: exit codes, artifacts, reproducibility."""

import json

import numpy as np
import pytest
from fractions import Fraction

from rauzynoise.cli import main
from rauzynoise.digitseq import read_digits
from rauzynoise.measures import MarkovSpec


def run(*argv):
    try:
        return main(list(argv))
    except SystemExit as exc:  # argparse --help and friends
        return exc.code


# ---------------------------------------------------------------------------
# exit codes


def test_no_subcommand_is_a_usage_error():
    assert run() == 64


def test_unknown_flag_is_a_usage_error(tmp_path):
    assert run("bounds", "--base", "2", "--bogus") == 64


def test_missing_input_file(tmp_path):
    assert run("analyze", str(tmp_path / "nope.digits")) == 2


def test_corrupt_digit_file(tmp_path):
    bad = tmp_path / "bad.digits"
    bad.write_text("base=2\n012\n")
    assert run("analyze", str(bad)) == 2


def test_bad_probabilities_are_a_parameter_error(tmp_path):
    rc = run("generate", "bernoulli", "--probs", "0.9,0.9", "--n", "10",
             "--seed", "1", "--out", str(tmp_path / "x.digits"))
    assert rc == 64


def test_randomized_kinds_require_a_seed(tmp_path):
    rc = run("generate", "bernoulli", "--probs", "0.5,0.5", "--n", "10",
             "--out", str(tmp_path / "x.digits"))
    assert rc == 64


def test_malformed_spec_json_is_an_input_error(tmp_path):
    spec = tmp_path / "chain.json"
    spec.write_text("{not json")
    rc = run("generate", "markov", "--spec", str(spec), "--n", "10",
             "--seed", "0", "--out", str(tmp_path / "x.digits"))
    assert rc == 2


def test_improper_fraction_is_a_parameter_error(tmp_path):
    rc = run("generate", "rational", "--p", "22", "--q", "7", "--base", "10",
             "--n", "10", "--out", str(tmp_path / "x.digits"))
    assert rc == 64


# ---------------------------------------------------------------------------
# generate


def test_rational_one_third(tmp_path):
    out = tmp_path / "third.digits"
    assert run("generate", "rational", "--p", "1", "--q", "3", "--base", "10",
               "--n", "10", "--out", str(out)) == 0
    assert out.read_text().splitlines()[1] == "3333333333"
    manifest = json.loads((tmp_path / "third.digits.manifest.json").read_text())
    assert manifest["length"] == 10
    assert manifest["base"] == 10
    assert "sha256" in manifest


def test_generation_is_byte_reproducible(tmp_path):
    args = ("generate", "bernoulli", "--probs", "0.75,0.25", "--n", "5000",
            "--seed", "7")
    a, b = tmp_path / "a.digits", tmp_path / "b.digits"
    assert run(*args, "--out", str(a)) == 0
    assert run(*args, "--out", str(b)) == 0
    assert a.read_bytes() == b.read_bytes()


def test_champernowne_prefix(tmp_path):
    out = tmp_path / "ch.digits"
    assert run("generate", "champernowne", "--base", "10", "--n", "11",
               "--out", str(out)) == 0
    assert out.read_text().splitlines()[1] == "12345678910"


def test_interleave_zeros_on_the_complement(tmp_path):
    out = tmp_path / "il.digits"
    assert run("generate", "interleave", "--base", "2", "--n", "64",
               "--seed", "3", "--out", str(out)) == 0
    x = read_digits(out)
    assert (x.digits[1::2] == 0).all()


def test_markov_sidecar_reports_entropy(tmp_path):
    spec = MarkovSpec.from_rows(
        2, 1, ((Fraction(3, 4), Fraction(1, 4)),
               (Fraction(1, 4), Fraction(3, 4))))
    spec_file = tmp_path / "chain.json"
    spec_file.write_text(json.dumps(spec.to_json_obj()))
    out = tmp_path / "mk.digits"
    assert run("generate", "markov", "--spec", str(spec_file), "--n", "500",
               "--seed", "9", "--log-base", "2", "--out", str(out)) == 0
    manifest = json.loads((tmp_path / "mk.digits.manifest.json").read_text())
    assert abs(manifest["entropy_nats"] - 0.5623351446188083) < 1e-12
    assert abs(manifest["entropy"] - manifest["entropy_nats"] / np.log(2)) < 1e-12
    assert manifest["measure_noise"] == 0.25


def test_codec_report(tmp_path):
    out = tmp_path / "cz.digits"
    assert run("generate", "rauzy-codec", "--blocks", "4", "--seed", "2",
               "--out", str(out)) == 0
    report = json.loads((tmp_path / "cz.digits.report.json").read_text())
    assert max(report["block_errors"]) <= 2
    assert report["params"]["base"] == 2
    assert report["params"]["k"] == 5
    assert report["beta_window"]["value"] <= 2 / 1606
    x = read_digits(out)
    assert len(x) == 4 * 1606


def test_block_concat_kind(tmp_path):
    out = tmp_path / "bc.digits"
    assert run("generate", "block-concat", "--base", "2", "--s", "1/5",
               "--j-max", "4", "--seed", "5", "--out", str(out)) == 0
    assert len(read_digits(out)) == 1700


# ---------------------------------------------------------------------------
# analyze


def make_digits(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_analyze_writes_profile_artifacts(tmp_path, capsys):
    path = make_digits(tmp_path, "z.digits", "base=2\n" + "0" * 4096 + "\n")
    prefix = tmp_path / "z"
    assert run("analyze", str(path), "--ell-max", "2",
               "--out-prefix", str(prefix)) == 0
    assert capsys.readouterr().out.strip().splitlines()[-1] == "PreservingLike"
    csv_lines = (tmp_path / "z.profile.csv").read_text().strip().splitlines()
    assert csv_lines[0] == "ell,N,mismatches,scored,beta"
    prof = json.loads((tmp_path / "z.profile.json").read_text())
    assert prof["schema_version"] == 1
    assert prof["source"]["length"] == 4096
    manifest = json.loads((tmp_path / "z.profile.manifest.json").read_text())
    assert manifest["threads"] == 1


def test_analyze_explicit_grid(tmp_path):
    path = make_digits(tmp_path, "z.digits", "base=2\n" + "01" * 512 + "\n")
    prefix = tmp_path / "z"
    assert run("analyze", str(path), "--ell-max", "1", "--grid", "128,256,512",
               "--out-prefix", str(prefix)) == 0
    prof = json.loads((tmp_path / "z.profile.json").read_text())
    assert [e["N"] for e in prof["entries"]] == [128, 256, 512]
    assert all(e["mismatches"] == 0 for e in prof["entries"])


def test_analyze_threads_do_not_change_artifacts(tmp_path):
    out = tmp_path / "u.digits"
    run("generate", "bernoulli", "--probs", "0.5,0.5", "--n", "50000",
        "--seed", "4", "--out", str(out))
    p1, p8 = tmp_path / "t1", tmp_path / "t8"
    assert run("analyze", str(out), "--ell-max", "3", "--threads", "1",
               "--out-prefix", str(p1)) == 0
    assert run("analyze", str(out), "--ell-max", "3", "--threads", "8",
               "--out-prefix", str(p8)) == 0
    assert (tmp_path / "t1.profile.csv").read_bytes() == \
        (tmp_path / "t8.profile.csv").read_bytes()
    assert (tmp_path / "t1.profile.json").read_bytes() == \
        (tmp_path / "t8.profile.json").read_bytes()


# ---------------------------------------------------------------------------
# bounds


def test_bounds_csv_and_json(tmp_path):
    prefix = tmp_path / "dim"
    assert run("bounds", "--base", "2", "--grid", "10",
               "--out-prefix", str(prefix)) == 0
    lines = (tmp_path / "dim.csv").read_text().strip().splitlines()
    assert lines[0] == "s,lower,upper,A1,A2,A4,L"
    assert len(lines) == 12
    first = lines[1].split(",")
    last = lines[-1].split(",")
    assert float(first[0]) == 0 and float(first[1]) == 0
    assert abs(float(last[1]) - 1) < 1e-12
    data = json.loads((tmp_path / "dim.json").read_text())
    assert data["base"] == 2
    assert len(data["s"]) == len(data["lower"]) == len(data["upper"]) == 11


# ---------------------------------------------------------------------------
# oracle


def test_oracle_agreement(capsys):
    assert run("oracle", "--base", "2", "--ell", "2", "--length", "64",
               "--trials", "4", "--seed", "3") == 0
    out = capsys.readouterr().out
    assert "4/4 trials agree" in out


def test_oracle_enumeration_cap():
    assert run("oracle", "--base", "2", "--ell", "5", "--length", "64",
               "--trials", "1", "--seed", "3") == 64


def test_oracle_is_deterministic(capsys):
    run("oracle", "--base", "3", "--ell", "1", "--length", "50",
        "--trials", "2", "--seed", "11")
    first = capsys.readouterr().out
    run("oracle", "--base", "3", "--ell", "1", "--length", "50",
        "--trials", "2", "--seed", "11")
    assert capsys.readouterr().out == first
