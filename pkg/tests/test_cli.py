import json
import math

import jsonschema
import pytest

from forkcast.cli import main, model_from_json, model_to_json
from forkcast.forkrate import conditional_fork_rate, fork_rate_iid, taylor_fork_rate
from forkcast.model import Fixed, IIDNull, MinerSet, SemiEmpiricalIID, BlockCounts
from forkcast.quadrature import Exponential, TruncatedPowerLaw

from conftest import SUITE_SEED

SCHEMA_PATH = "docs/report.schema.json"


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture()
def fitted_exp_model(tmp_path, dataset_dir, capsys):
    code, out, _ = run_cli(
        capsys, "fit", "--blocks", str(dataset_dir / "blocks.csv"),
        "--lambda", "0.0017", "--family", "exp",
    )
    assert code == 0
    path = tmp_path / "model_exp.json"
    path.write_text(out)
    return path, json.loads(out)


class TestModelJson:
    def test_round_trip_all_kinds(self):
        models = [
            Fixed(MinerSet([0.001, 0.0007])),
            IIDNull(Exponential(2e4), 10),
            IIDNull(TruncatedPowerLaw(0.75, 5000.0), 5),
            SemiEmpiricalIID(BlockCounts([5, 7]), 1e6),
        ]
        for model in models:
            assert model_from_json(model_to_json(model)) == model

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError):
            model_from_json({"kind": "mystery"})


class TestFit:
    def test_equal_counts_exponential_rate(self, tmp_path, capsys):
        blocks = tmp_path / "blocks.csv"
        rows = ["height,timestamp,bits,miner_id"]
        for i in range(100):
            rows.append(f"{i},{1700000000 + 600 * i},0x1d00ffff,m{i % 4}")
        blocks.write_text("\n".join(rows) + "\n")
        code, out, _ = run_cli(
            capsys, "fit", "--blocks", str(blocks), "--lambda", "0.0017",
            "--family", "exp",
        )
        assert code == 0
        doc = json.loads(out)
        # equal counts: r = 1/m = n / lambda
        assert doc["family"]["rate"] == pytest.approx(4 / 0.0017)
        assert any("mean only" in n for n in doc["notes"])

    def test_fixture_tpl_matches_library(self, dataset_dir, capsys):
        from forkcast.estimate import fit_moments, method_of_moments
        from forkcast.ingest import count_blocks_by_miner, parse_blocks_csv

        code, out, _ = run_cli(
            capsys, "fit", "--blocks", str(dataset_dir / "blocks.csv"),
            "--lambda", "0.0017", "--family", "tpl",
        )
        assert code == 0
        doc = json.loads(out)
        _, counts = count_blocks_by_miner(parse_blocks_csv(dataset_dir / "blocks.csv"))
        fam = method_of_moments(fit_moments(counts, 0.0017), "tpl")
        assert doc["family"]["alpha"] == fam.alpha
        assert doc["family"]["beta"] == fam.beta
        assert doc["n"] == 35

    def test_zero_miners_flag(self, dataset_dir, capsys):
        code, out, _ = run_cli(
            capsys, "fit", "--blocks", str(dataset_dir / "blocks.csv"),
            "--lambda", "0.0017", "--family", "semi-inid", "--zero-miners", "5",
        )
        assert code == 0
        doc = json.loads(out)
        assert doc["n"] == 40
        assert doc["counts"].count(0) == 5

    def test_missing_file_exits_2(self, capsys):
        code, out, err = run_cli(
            capsys, "fit", "--blocks", "/does/not/exist.csv",
            "--lambda", "0.0017", "--family", "exp",
        )
        assert code == 2
        assert out == ""  # no partial output


class TestForkrateCommand:
    def test_conditional_two_equal_miners(self, tmp_path, capsys):
        model = tmp_path / "fixed.json"
        model.write_text(json.dumps(model_to_json(Fixed(MinerSet([0.001, 0.001])))))
        code, out, _ = run_cli(
            capsys, "forkrate", "--model", str(model), "--delta0", "100",
            "--method", "conditional",
        )
        assert code == 0
        line = out.splitlines()[1].split(",")
        assert float(line[1]) == pytest.approx(0.0951626, rel=1e-6)
        assert line[3] == "conditional"

    def test_taylor_agrees_with_auto_at_small_tau(self, tmp_path, capsys):
        miners = MinerSet([0.0005, 0.0005])
        model = tmp_path / "fixed.json"
        model.write_text(json.dumps(model_to_json(Fixed(miners))))
        d0 = 0.001 / miners.total  # tau = 1e-3
        _, out_taylor, _ = run_cli(
            capsys, "forkrate", "--model", str(model), "--delta0", str(d0),
            "--method", "taylor",
        )
        _, out_auto, _ = run_cli(
            capsys, "forkrate", "--model", str(model), "--delta0", str(d0),
            "--method", "auto",
        )
        v_taylor = float(out_taylor.splitlines()[1].split(",")[1])
        v_auto = float(out_auto.splitlines()[1].split(",")[1])
        assert v_taylor == pytest.approx(v_auto, rel=1e-3)

    def test_delta_list_matches_library_bit_for_bit(self, fitted_exp_model, capsys):
        path, doc = fitted_exp_model
        code, out, _ = run_cli(
            capsys, "forkrate", "--model", str(path), "--delta0", "0.5,1,2",
        )
        assert code == 0
        family = Exponential(doc["family"]["rate"])
        for line, d0 in zip(out.splitlines()[1:], (0.5, 1.0, 2.0)):
            fields = line.split(",")
            assert float(fields[1]) == fork_rate_iid(family, doc["n"], d0).value

    def test_blocks_input_conditional(self, dataset_dir, capsys):
        code, out, _ = run_cli(
            capsys, "forkrate", "--blocks", str(dataset_dir / "blocks.csv"),
            "--lambda", "0.0017", "--delta0", "1.0",
        )
        assert code == 0
        assert out.splitlines()[1].split(",")[3] == "conditional"


class TestSimulateCommand:
    def test_seed_repeat_byte_identical(self, fitted_exp_model, capsys):
        path, _ = fitted_exp_model
        args = (
            "simulate", "--model", str(path), "--delta0", "1.0",
            "--rounds", "100000", "--seed", "42",
        )
        code_a, out_a, _ = run_cli(capsys, *args)
        code_b, out_b, _ = run_cli(capsys, *args)
        assert code_a == code_b == 0
        assert out_a == out_b

    def test_thread_counts_agree(self, fitted_exp_model, capsys):
        path, _ = fitted_exp_model
        outputs = []
        for t in ("1", "8"):
            _, out, _ = run_cli(
                capsys, "simulate", "--model", str(path), "--delta0", "1.0",
                "--rounds", "200000", "--seed", "7", "--threads", t,
            )
            outputs.append(out)
        assert outputs[0] == outputs[1]

    def test_z_score_within_three(self, fitted_exp_model, capsys):
        path, _ = fitted_exp_model
        _, out, _ = run_cli(
            capsys, "simulate", "--model", str(path), "--delta0", "1.0",
            "--rounds", "1000000", "--seed", str(SUITE_SEED),
        )
        doc = json.loads(out)
        assert abs(doc["z_score"]) <= 3.0
        assert doc["stderr"] > 0


class TestImpliedCommand:
    def test_delta_anchor(self, capsys):
        code, out, _ = run_cli(
            capsys, "implied", "delta", "--forkrate", "0.0041",
            "--lambda", "0.0017", "--hhi", "0.2",
        )
        assert code == 0
        doc = json.loads(out)
        assert doc["value"] == pytest.approx(3.0147, rel=1e-4)

    def test_hhi_negative_regime(self, capsys):
        code, out, _ = run_cli(
            capsys, "implied", "hhi", "--forkrate", "0.0041",
            "--lambda", "0.0017", "--delta0", "0.815",
        )
        assert code == 0
        doc = json.loads(out)
        assert doc["value"] == pytest.approx(-1.959, rel=1e-3)
        assert doc["valid"] is False

    def test_zero_fork_rate(self, capsys):
        _, out, _ = run_cli(
            capsys, "implied", "delta", "--forkrate", "0",
            "--lambda", "0.0017", "--hhi", "0.2",
        )
        assert json.loads(out)["value"] == 0.0
        _, out, _ = run_cli(
            capsys, "implied", "hhi", "--forkrate", "0",
            "--lambda", "0.0017", "--delta0", "2.0",
        )
        assert json.loads(out)["value"] == 1.0

    def test_missing_mode_flag(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["implied", "delta", "--forkrate", "0.1", "--lambda", "0.0017"])
        assert exc.value.code == 2


class TestBandCommand:
    def test_deterministic_and_bracketing(self, dataset_dir, capsys):
        args = (
            "band", "--blocks", str(dataset_dir / "blocks.csv"),
            "--lambda", "0.0017", "--family", "exp",
            "--delta0-grid", "0.5,2", "--samples", "100",
            "--seed", str(SUITE_SEED),
        )
        code, out_a, _ = run_cli(capsys, *args)
        assert code == 0
        _, out_b, _ = run_cli(capsys, *args)
        assert out_a == out_b
        for line in out_a.splitlines()[1:]:
            _, lo, pt, up = (float(x) for x in line.split(","))
            assert lo <= pt <= up


@pytest.fixture(scope="module")
def report(tmp_path_factory, dataset_dir):
    out = tmp_path_factory.mktemp("report") / "report.json"
    code = main([
        "pipeline",
        "--blocks", str(dataset_dir / "blocks.csv"),
        "--stale", str(dataset_dir / "stale.csv"),
        "--propagation", str(dataset_dir / "propagation.csv"),
        "--hashrate", str(dataset_dir / "hashrate.csv"),
        "--out", str(out),
    ])
    assert code == 0
    return out, json.loads(out.read_text())


class TestPipelineCommand:
    def test_three_period_fixture(self, report):
        _, doc = report
        assert len(doc["periods"]) == 3
        assert all("error" not in e for e in doc["periods"])

    def test_validates_against_shipped_schema(self, report):
        _, doc = report
        schema = json.loads(open(SCHEMA_PATH).read())
        jsonschema.validate(doc, schema)

    def test_family_ordering_per_period(self, report):
        _, doc = report
        for entry in doc["periods"]:
            rates = entry["model_fork_rates"]
            for pct in ("p50", "p90", "p99"):
                assert rates["exp"][pct] >= rates["lognormal"][pct] >= rates["tpl"][pct]

    def test_csv_twin_matches_to_twelve_digits(self, report):
        path, doc = report
        csv_path = path.with_suffix(".csv")
        lines = csv_path.read_text().splitlines()
        header = lines[0].split(",")
        for line in lines[1:]:
            row = dict(zip(header, line.split(",")))
            entry = doc["periods"][int(row["period"])]
            json_value = entry["model_fork_rates"][row["family"]][row["delay_percentile"]]
            csv_value = float(row["model_fork_rate"])
            if json_value != 0:
                assert abs(csv_value - json_value) / abs(json_value) < 1e-12
            assert float(row["hhi"]) == pytest.approx(entry["hhi"], rel=1e-12)

    def test_input_digests_present(self, report):
        _, doc = report
        for name in ("blocks", "stale", "propagation", "hashrate"):
            assert len(doc["inputs"][name]["sha256"]) == 64

    def test_empty_stale_file(self, tmp_path, dataset_dir, capsys):
        empty = tmp_path / "stale.csv"
        empty.write_text("height\n")
        out = tmp_path / "report.json"
        code = main([
            "pipeline",
            "--blocks", str(dataset_dir / "blocks.csv"),
            "--stale", str(empty),
            "--propagation", str(dataset_dir / "propagation.csv"),
            "--hashrate", str(dataset_dir / "hashrate.csv"),
            "--out", str(out), "--families", "exp",
        ])
        assert code == 0
        doc = json.loads(out.read_text())
        for entry in doc["periods"]:
            assert entry["fork_rate_empirical"] == 0.0
            assert entry["model_fork_rates"]["exp"]["p50"] > 0

    def test_thread_invariance(self, tmp_path, dataset_dir):
        docs = []
        for t in ("1", "4"):
            out = tmp_path / f"report_{t}.json"
            main([
                "pipeline",
                "--blocks", str(dataset_dir / "blocks.csv"),
                "--stale", str(dataset_dir / "stale.csv"),
                "--propagation", str(dataset_dir / "propagation.csv"),
                "--hashrate", str(dataset_dir / "hashrate.csv"),
                "--out", str(out), "--threads", t, "--families", "exp,tpl",
            ])
            docs.append(out.read_text())
        assert docs[0] == docs[1]


class TestParserBasics:
    def test_help_lists_subcommands(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["--help"])
        assert exc.value.code == 0
        out = capsys.readouterr().out
        for cmd in ("fit", "forkrate", "simulate", "implied", "band", "pipeline"):
            assert cmd in out

    def test_unknown_flag_exits_2(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["fit", "--nope"])
        assert exc.value.code == 2

    def test_env_threads_default(self, monkeypatch):
        monkeypatch.setenv("FORKCAST_THREADS", "3")
        from forkcast.cli import build_parser

        args = build_parser().parse_args(
            ["simulate", "--model", "x", "--delta0", "1", "--rounds", "1", "--seed", "1"]
        )
        assert args.threads == 3
