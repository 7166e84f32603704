"""Tests for the command-line interface."""

import itertools
import json

import pytest

from entangle.cli import EXIT_IO, EXIT_OK, EXIT_VALIDATION, build_arg_parser, main
from entangle.errors import ConfigError
from entangle.inference import DEFAULT_ALPHA_GRID
from tests.helpers import read_jsonl, write_jsonl

TRIAD = ("sadness", "anticipation", "anger")


@pytest.fixture
def labels_file(tmp_path):
    path = tmp_path / "labels.txt"
    path.write_text("\n".join(TRIAD) + "\n", encoding="utf-8")
    return str(path)


@pytest.fixture
def gold_file(tmp_path):
    """Gold file over the triad labels."""
    rows = [
        {"sadness": 1, "anticipation": 1},
        {"sadness": 1, "anticipation": 1},
        {"sadness": 1, "anticipation": 1},
        {"anger": 1},
        {},
        {"sadness": 1},
    ]
    path = tmp_path / "gold.jsonl"
    write_jsonl(path, [{"id": f"item-{k}", "labels": labels} for k, labels in enumerate(rows)])
    return str(path)


@pytest.fixture
def prior_file(tmp_path, labels_file, gold_file):
    path = tmp_path / "prior.json"
    assert main(["estimate-prior", gold_file, "--labels", labels_file, "-o", str(path)]) == EXIT_OK
    return str(path)


@pytest.fixture
def predictions_file(tmp_path, gold_file):
    """p1-encoded predictions for every gold item."""
    p1 = {"sadness": 0.8, "anticipation": 0.45, "anger": 0.3}
    path = tmp_path / "pred.jsonl"
    write_jsonl(
        path,
        [
            {"id": row["id"], "labels": {name: {"p1": value} for name, value in p1.items()}}
            for row in read_jsonl(gold_file)
        ],
    )
    return str(path)


class TestArgParser:
    """Test argument parsing."""

    def test_subcommand_required(self):
        """Test a missing subcommand is a usage error."""
        with pytest.raises(ConfigError):
            build_arg_parser().parse_args([])

    def test_bad_value_is_config_error(self):
        """Test an unparsable option value raises instead of exiting."""
        with pytest.raises(ConfigError, match="--alpha"):
            build_arg_parser().parse_args(
                ["infer", "p.jsonl", "--prior", "prior.json", "--alpha", "abc"]
            )

    def test_help_still_exits_cleanly(self, capsys):
        """Test --help prints usage and exits with status 0."""
        with pytest.raises(SystemExit) as excinfo:
            build_arg_parser().parse_args(["stats", "--help"])

        assert excinfo.value.code == 0
        assert "usage:" in capsys.readouterr().out

    def test_defaults(self):
        """Test infer defaults to alpha 1 with normalization."""
        args = build_arg_parser().parse_args(["infer", "p.jsonl", "--prior", "prior.json"])

        assert args.alpha == 1.0
        assert args.no_normalize is False
        assert args.output == "-"
        assert args.seed == 0

    def test_log_level_case(self):
        """Test log levels are accepted in any case."""
        args = build_arg_parser().parse_args(["stats", "g.jsonl", "--log-level", "debug"])

        assert args.log_level == "DEBUG"


class TestCommands:
    """Test each subcommand end to end."""

    def test_stats(self, tmp_path, labels_file, gold_file):
        """Test statistics of a gold file."""
        out = tmp_path / "stats.json"

        assert main(["stats", gold_file, "--labels", labels_file, "-o", str(out)]) == EXIT_OK
        stats = json.loads(out.read_text(encoding="utf-8"))

        assert stats["n"] == 6
        assert stats["multi_label_count"] == 3
        assert stats["label_counts"] == {"sadness": 4, "anticipation": 3, "anger": 1}

    def test_stats_to_stdout(self, capsys, labels_file, gold_file):
        """Test '-' output goes to stdout."""
        assert main(["stats", gold_file, "--labels", labels_file]) == EXIT_OK

        assert json.loads(capsys.readouterr().out)["n"] == 6

    def test_estimate_prior(self, prior_file):
        """Test the prior file lists labels and couplings."""
        with open(prior_file, encoding="utf-8") as handle:
            payload = json.load(handle)

        assert payload["labels"] == list(TRIAD)
        assert payload["epsilon"] == 0.5
        assert len(payload["theta_ij"]) == 3
        assert payload["provenance"]["n_items"] == 6

    def test_response_pipeline(self, tmp_path, labels_file, gold_file, prior_file):
        """Test parsed answers decoded at alpha 0 reproduce the answers."""
        raw = tmp_path / "raw.jsonl"
        gold = {row["id"]: row["labels"] for row in read_jsonl(gold_file)}
        write_jsonl(
            raw,
            [
                {
                    "id": item_id,
                    "label": name,
                    "text": f"<confidence>4</confidence><answer>{'yes' if labels.get(name) else 'no'}</answer>",
                }
                for item_id, labels in gold.items()
                for name in TRIAD
            ],
        )
        pred = tmp_path / "pred.jsonl"
        mapped = tmp_path / "map.jsonl"
        report = tmp_path / "report.json"

        assert main(["parse-responses", str(raw), "--labels", labels_file, "-o", str(pred)]) == 0
        assert main(["infer", str(pred), "--prior", prior_file, "--alpha", "0", "-o", str(mapped)]) == 0
        assert main(
            ["evaluate", str(mapped), gold_file, "--labels", labels_file, "--with-baseline",
             "-o", str(report)]
        ) == 0

        result = json.loads(report.read_text(encoding="utf-8"))
        assert read_jsonl(pred)[0]["confidence"] == {name: 4 for name in TRIAD}
        assert result["report"]["hamming_loss"] == 0.0
        assert result["report"]["lexical_accuracy"] == 1.0
        assert result["report"]["vector_accuracy"] == 1.0
        assert result["delta"]["hamming_loss"] == 0.0

    def test_parse_responses_missing_answer(self, tmp_path, labels_file):
        """Test a missing answer fails validation unless filled."""
        raw = tmp_path / "raw.jsonl"
        write_jsonl(raw, [{"id": "s1", "label": "sadness", "text": "<answer>yes</answer>"}])
        out = tmp_path / "pred.jsonl"

        assert main(["parse-responses", str(raw), "--labels", labels_file, "-o", str(out)]) == 1
        assert main(
            ["parse-responses", str(raw), "--labels", labels_file, "--fill", "neutral", "-o", str(out)]
        ) == 0
        assert read_jsonl(out)[0]["labels"]["anger"] == {"p1": 0.5, "p0": 0.5}

    def test_infer_with_metrics(self, tmp_path, predictions_file, prior_file):
        """Test MAP output and Prometheus metrics are written."""
        out = tmp_path / "map.jsonl"
        metrics = tmp_path / "metrics.prom"

        code = main(
            ["infer", predictions_file, "--prior", prior_file, "--workers", "2",
             "--metrics-out", str(metrics), "-o", str(out)]
        )

        rows = read_jsonl(out)
        assert code == EXIT_OK
        assert len(rows) == 6
        assert set(rows[0]) == {"id", "map", "baseline", "objective"}
        assert 'entangle_records_inferred_total{alpha="1"} 6.0' in metrics.read_text(encoding="utf-8")

    def test_infer_entangles(self, tmp_path, predictions_file, prior_file):
        """Test the prior pulls anticipation in alongside sadness."""
        out = tmp_path / "map.jsonl"

        assert main(["infer", predictions_file, "--prior", prior_file, "-o", str(out)]) == 0

        row = read_jsonl(out)[0]
        assert row["baseline"] == {"sadness": 1, "anticipation": 0, "anger": 0}
        assert row["map"]["anticipation"] == 1

    def test_evaluate_text(self, tmp_path, labels_file, gold_file):
        """Test gold scored against itself renders a perfect text report."""
        out = tmp_path / "report.txt"

        assert main(
            ["evaluate", gold_file, gold_file, "--labels", labels_file, "--format", "text",
             "-o", str(out)]
        ) == 0

        text = out.read_text(encoding="utf-8")
        assert "lexical accuracy 100.00" in text
        assert "hamming loss     0.00" in text

    def test_sweep_default_grid(self, tmp_path, predictions_file, gold_file, prior_file):
        """Test the sweep covers the default grid with alpha 0 as baseline."""
        out = tmp_path / "sweep.json"

        assert main(["sweep", predictions_file, gold_file, "--prior", prior_file, "-o", str(out)]) == 0

        result = json.loads(out.read_text(encoding="utf-8"))
        assert result["alphas"] == list(DEFAULT_ALPHA_GRID)
        assert [r["alpha"] for r in result["reports"]] == list(DEFAULT_ALPHA_GRID)
        assert set(result["best"]) == {"lexical_accuracy", "vector_accuracy", "hamming_loss", "macro_f1"}
        assert result["deltas"][0]["hamming_loss"] == 0.0

    def test_sweep_custom_grid(self, tmp_path, predictions_file, gold_file, prior_file):
        """Test duplicate alphas collapse and the grid is sorted."""
        out = tmp_path / "sweep.json"

        assert main(
            ["sweep", predictions_file, gold_file, "--prior", prior_file,
             "--alphas", "1", "0", "1", "-o", str(out)]
        ) == 0

        assert json.loads(out.read_text(encoding="utf-8"))["alphas"] == [0.0, 1.0]

    def test_estimate_synth_round_trip(self, tmp_path):
        """Test a prior fit on a uniform design survives resampling."""
        labels = tmp_path / "labels.txt"
        labels.write_text("w\nx\ny\nz\n", encoding="utf-8")
        names = ("w", "x", "y", "z")
        gold = tmp_path / "gold.jsonl"
        rows = []
        for k, bits in enumerate(itertools.product((0, 1), repeat=4)):
            for copy in range(10):
                rows.append({"id": f"g{k}-{copy}", "labels": dict(zip(names, bits))})
        write_jsonl(gold, rows)
        prior = tmp_path / "prior.json"
        synth = tmp_path / "synth.jsonl"
        refit = tmp_path / "refit.json"

        assert main(["estimate-prior", str(gold), "--labels", str(labels), "-o", str(prior)]) == 0
        assert main(["synth", "--prior", str(prior), "-n", "20000", "--seed", "3", "-o", str(synth)]) == 0
        assert main(["estimate-prior", str(synth), "--labels", str(labels), "-o", str(refit)]) == 0

        first = json.loads(prior.read_text(encoding="utf-8"))
        second = json.loads(refit.read_text(encoding="utf-8"))
        assert first["theta_i"] == [0.0] * 4
        assert all(abs(e["value"]) < 1e-3 for e in first["theta_ij"])
        assert all(abs(v) < 0.1 for v in second["theta_i"])
        assert all(abs(e["value"]) < 0.15 for e in second["theta_ij"])
        assert len(read_jsonl(synth)) == 20000

    def test_agree(self, tmp_path, labels_file):
        """Test agreement output and majority-vote gold."""
        annotations = tmp_path / "ann.jsonl"
        write_jsonl(
            annotations,
            [
                {"id": "s1", "annotations": [{"sadness": 1}, {"sadness": 1}, {}]},
                {"id": "s2", "annotations": [{"anger": 1}, {"anger": 1}, {"anger": 1}]},
            ],
        )
        out = tmp_path / "agree.json"
        gold_out = tmp_path / "majority.jsonl"

        assert main(
            ["agree", str(annotations), "--labels", labels_file, "-o", str(out),
             "--gold-out", str(gold_out)]
        ) == 0

        report = json.loads(out.read_text(encoding="utf-8"))
        assert report["annotators"] == 3
        assert read_jsonl(gold_out) == [
            {"id": "s1", "labels": {"sadness": 1, "anticipation": 0, "anger": 0}},
            {"id": "s2", "labels": {"sadness": 0, "anticipation": 0, "anger": 1}},
        ]

    def test_analyze_with_csv(self, tmp_path, labels_file, gold_file):
        """Test analysis JSON and matrix CSVs."""
        out = tmp_path / "analysis.json"
        csv_dir = tmp_path / "matrices"

        assert main(
            ["analyze", gold_file, "--labels", labels_file, "--bits", "--csv-dir", str(csv_dir),
             "-o", str(out)]
        ) == 0

        analysis = json.loads(out.read_text(encoding="utf-8"))
        assert analysis["mi_base"] == "bits"
        for name in ("cooccurrence", "mutual_information", "lift"):
            header = (csv_dir / f"{name}.csv").read_text(encoding="utf-8").splitlines()[0]
            assert header == "," + ",".join(TRIAD)


class TestExitCodes:
    """Test failure exit statuses."""

    def test_missing_file(self, tmp_path, labels_file, capsys):
        """Test unreadable input exits with 2."""
        code = main(["stats", str(tmp_path / "absent.jsonl"), "--labels", labels_file])

        assert code == EXIT_IO
        assert "stats" in capsys.readouterr().err

    def test_malformed_line(self, tmp_path, labels_file, capsys):
        """Test malformed input exits with 1 and names the line."""
        gold = tmp_path / "gold.jsonl"
        gold.write_text('{"id": "a", "labels": {}}\nnot json\n', encoding="utf-8")

        code = main(["stats", str(gold), "--labels", labels_file])

        assert code == EXIT_VALIDATION
        assert f"{gold}:2" in capsys.readouterr().err

    def test_missing_gold(self, tmp_path, predictions_file, prior_file, labels_file):
        """Test predictions without gold fail validation."""
        gold = tmp_path / "partial.jsonl"
        write_jsonl(gold, [{"id": "item-0", "labels": {"sadness": 1}}])

        assert main(
            ["sweep", predictions_file, str(gold), "--prior", prior_file, "-o", str(tmp_path / "s.json")]
        ) == EXIT_VALIDATION

    def test_negative_alpha(self, tmp_path, predictions_file, prior_file):
        """Test a negative alpha fails validation."""
        assert main(
            ["infer", predictions_file, "--prior", prior_file, "--alpha", "-1", "-o", str(tmp_path / "m")]
        ) == EXIT_VALIDATION

    def test_synth_needs_positive_count(self, tmp_path, prior_file):
        """Test a zero sample size fails validation."""
        assert main(["synth", "--prior", prior_file, "-n", "0"]) == EXIT_VALIDATION

    def test_invalid_utf8_line(self, tmp_path, labels_file, capsys):
        """Test undecodable bytes exit with 1 and name the line."""
        gold = tmp_path / "gold.jsonl"
        gold.write_bytes(b'{"id": "a", "labels": {}}\n{"id": "b\xff", "labels": {}}\n')

        code = main(["stats", str(gold), "--labels", labels_file])

        assert code == EXIT_VALIDATION
        assert f"{gold}:2" in capsys.readouterr().err

    def test_bad_argument_value(self, tmp_path, predictions_file, prior_file, capsys):
        """Test an unparsable option value exits with 1, not the I/O status."""
        code = main(
            ["infer", predictions_file, "--prior", prior_file, "--alpha", "abc", "-o", str(tmp_path / "m")]
        )

        assert code == EXIT_VALIDATION
        assert "invalid float value" in capsys.readouterr().err

    def test_unknown_option(self, gold_file):
        """Test an unrecognized option exits with 1."""
        assert main(["stats", gold_file, "--no-such-flag"]) == EXIT_VALIDATION
