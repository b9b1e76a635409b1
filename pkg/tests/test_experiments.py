"""
Tests for the overfit run and the fusion ablation comparison
"""

from pathlib import Path

import pytest

from adenet.config import load_run_config
from adenet.harness.experiments import (
    ABLATION_VARIANTS,
    AblationStudy,
    OverfitResult,
    ablation_study,
    composite_score,
    ensure_corpus,
    overfit_experiment,
)
from adenet.objectives import EvalReport
from adenet.signalio import CorpusConfig, load_corpus_config
from conftest import tiny_run_config

DEMO_DATA = Path(__file__).resolve().parents[1] / "demo-data"


def _report(auc: float, si_sdri_db: float | None) -> EvalReport:
    return EvalReport(map=0.5, auc=auc, f1=0.5, si_sdri_db=si_sdri_db, clip_count=1, frame_count=10)


@pytest.mark.unit
class TestScoring:
    def test_composite(self):
        assert composite_score(_report(0.8, 4.0)) == pytest.approx(1.0)
        assert composite_score(_report(0.8, None)) == pytest.approx(0.8)

    def test_verdicts(self):
        study = AblationStudy(
            {
                "full": _report(0.9, 4.0),
                "no_a_to_s": _report(0.9, 4.1),
                "no_s_to_a": _report(0.95, 4.0),
            }
        )
        assert study.verdicts() == {"no_a_to_s": "tie", "no_s_to_a": "worse"}
        study.reports["no_s_to_a"] = _report(0.7, 2.0)
        assert study.verdicts()["no_s_to_a"] == "ok"

    def test_table(self):
        study = AblationStudy({"full": _report(0.9, 4.0), "no_a_to_s": _report(0.8, None)})
        lines = study.to_table().splitlines()
        assert lines[0].split() == ["variant", "AUC", "SI-SDRi", "composite"]
        assert lines[2].split()[2] == "na"

    def test_overfit_thresholds(self):
        assert OverfitResult(_report(0.96, 6.0), 500).passed
        assert not OverfitResult(_report(0.96, 4.0), 500).passed
        assert not OverfitResult(_report(0.9, 8.0), 500).passed
        assert not OverfitResult(_report(0.99, None), 500).passed


@pytest.mark.integration
def test_ensure_corpus_reuses_existing(tmp_path):
    config = CorpusConfig(counts={"train": 2}, output_dir=str(tmp_path / "c"), duration_range_s=(1.0, 1.0))
    first = ensure_corpus(config)
    stamp = (tmp_path / "c" / "train.jsonl").stat().st_mtime_ns
    second = ensure_corpus(config)
    assert (tmp_path / "c" / "train.jsonl").stat().st_mtime_ns == stamp
    assert [r.clip_id for r in first["train"].records] == [r.clip_id for r in second["train"].records]


@pytest.mark.integration
def test_ablation_study_runs_every_variant(tmp_path):
    corpus = CorpusConfig(
        counts={"train": 4, "test": 4}, master_seed=2, output_dir=str(tmp_path / "c"), duration_range_s=(1.0, 1.0)
    )
    study = ablation_study(tiny_run_config(max_steps=1), corpus, tmp_path / "runs")
    assert tuple(study.reports) == ABLATION_VARIANTS
    assert set(study.verdicts()) == {"no_a_to_s", "no_s_to_a"}
    assert set(study.verdicts().values()) <= {"ok", "tie", "worse"}
    assert (tmp_path / "runs" / "ablation_report.txt").read_text() == study.to_table()


@pytest.mark.slow
def test_overfit_reaches_targets(tmp_path):
    run = load_run_config(DEMO_DATA / "overfit-config.json", env={})
    corpus = load_corpus_config(DEMO_DATA / "overfit-corpus.json", output_dir=str(tmp_path / "corpus"))
    result = overfit_experiment(run, corpus, tmp_path / "runs")
    assert result.steps == run.optim.max_steps
    assert result.report.auc >= 0.95
    assert result.report.si_sdri_db >= 5.0


@pytest.mark.slow
@pytest.mark.xfail(strict=False, reason="direction of the ablations is not guaranteed at a short training budget")
def test_removing_a_fusion_path_does_not_help(tmp_path):
    run = load_run_config(DEMO_DATA / "ablation-config.json", env={})
    corpus = load_corpus_config(DEMO_DATA / "ablation-corpus.json", output_dir=str(tmp_path / "corpus"))
    study = ablation_study(run, corpus, tmp_path / "runs")
    verdicts = study.verdicts()
    assert set(verdicts) == {"no_a_to_s", "no_s_to_a"}
    assert set(verdicts.values()) <= {"ok", "tie"}, study.to_table()
