"""
Experiments - overfit sanity run and the circulant-fusion ablation comparison
"""

from dataclasses import dataclass, field
from pathlib import Path

from adenet.config import RunConfig
from adenet.harness.ablation import ablate
from adenet.harness.evaluation import evaluate
from adenet.harness.training import train
from adenet.log import get_logger
from adenet.objectives import EvalReport
from adenet.signalio import CorpusConfig, CorpusManifest, gen_corpus, read_manifest

logger = get_logger(__name__)

OVERFIT_MIN_AUC = 0.95
OVERFIT_MIN_SI_SDRI_DB = 5.0
SI_SDRI_SCALE_DB = 20.0
COMPOSITE_TIE_TOLERANCE = 0.01
ABLATION_VARIANTS = ("full", "no_a_to_s", "no_s_to_a")


def ensure_corpus(config: CorpusConfig) -> dict[str, CorpusManifest]:
    """Reuse an existing corpus directory, generating it on first use"""
    root = Path(config.output_dir)
    if (root / "corpus.json").exists() and all((root / f"{s}.jsonl").exists() for s in config.counts):
        return {split: read_manifest(root, split) for split in config.counts}
    return gen_corpus(config)


@dataclass
class OverfitResult:
    report: EvalReport
    steps: int

    @property
    def passed(self) -> bool:
        return (
            self.report.auc >= OVERFIT_MIN_AUC
            and self.report.si_sdri_db is not None
            and self.report.si_sdri_db >= OVERFIT_MIN_SI_SDRI_DB
        )


def overfit_experiment(run: RunConfig, corpus: CorpusConfig, out_dir: str | Path) -> OverfitResult:
    """Train on the tiny training split and score on the same clips"""
    out_dir = Path(out_dir)
    manifest = ensure_corpus(corpus)["train"]
    run.data.corpus_dir = corpus.output_dir
    ckpt = train(run, out_dir / "overfit.pt", train_manifest=manifest)
    report = evaluate(ckpt, manifest)
    steps = int(ckpt.history[-1]["steps"]) if ckpt.history else 0
    result = OverfitResult(report, steps)
    logger.info("overfit_finished", auc=report.auc, si_sdri_db=report.si_sdri_db, steps=steps, passed=result.passed)
    return result


def composite_score(report: EvalReport) -> float:
    """AUC plus SI-SDR improvement scaled by 20 dB"""
    return report.auc + (report.si_sdri_db or 0.0) / SI_SDRI_SCALE_DB


@dataclass
class AblationStudy:
    reports: dict[str, EvalReport] = field(default_factory=dict)

    def composite(self, variant: str) -> float:
        return composite_score(self.reports[variant])

    def verdicts(self) -> dict[str, str]:
        """Per ablated variant: `ok` when full >= variant, `tie` within tolerance, else `worse`"""
        full = self.composite("full")
        out = {}
        for variant in self.reports:
            if variant == "full":
                continue
            gap = full - self.composite(variant)
            out[variant] = "ok" if gap >= 0 else "tie" if gap >= -COMPOSITE_TIE_TOLERANCE else "worse"
        return out

    def to_table(self) -> str:
        lines = [f"{'variant':<10} {'AUC':>7} {'SI-SDRi':>8} {'composite':>10}"]
        for variant, report in self.reports.items():
            si_sdri = "na" if report.si_sdri_db is None else f"{report.si_sdri_db:.3f}"
            lines.append(f"{variant:<10} {report.auc:>7.4f} {si_sdri:>8} {self.composite(variant):>10.4f}")
        return "\n".join(lines) + "\n"


def ablation_study(base: RunConfig, corpus: CorpusConfig, out_dir: str | Path) -> AblationStudy:
    """Train the full model and each fusion ablation with the same seed and budget"""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifests = ensure_corpus(corpus)
    base.data.corpus_dir = corpus.output_dir
    study = AblationStudy()
    for variant in ABLATION_VARIANTS:
        config = base if variant == "full" else ablate(base, variant)
        ckpt = train(config, out_dir / f"{variant}.pt", train_manifest=manifests["train"], val_manifest=None)
        study.reports[variant] = evaluate(ckpt, manifests["test"])
        logger.info("ablation_variant_finished", variant=variant, composite=study.composite(variant))
    (out_dir / "ablation_report.txt").write_text(study.to_table())
    return study
