"""
Ablation Study
Trains the full model and both circulant-fusion ablations on the same corpus,
seed and step budget, then compares AUC + scaled SI-SDRi composites
"""

import argparse
import sys

from dotenv import load_dotenv

from adenet.config import load_run_config
from adenet.harness.experiments import COMPOSITE_TIE_TOLERANCE, ablation_study
from adenet.log import configure_logging
from adenet.signalio import load_corpus_config


def main() -> int:
    parser = argparse.ArgumentParser(description="compare the full model against fusion ablations")
    parser.add_argument("--config", default="demo-data/ablation-config.json")
    parser.add_argument("--corpus-config", default="demo-data/ablation-corpus.json")
    parser.add_argument("--out", default="runs/ablation")
    args = parser.parse_args()

    load_dotenv()
    configure_logging()

    print("Ablation Study")
    print("=" * 50)
    study = ablation_study(
        load_run_config(args.config), load_corpus_config(args.corpus_config), args.out
    )
    print(study.to_table(), end="")
    print("=" * 50)

    verdicts = study.verdicts()
    for variant, verdict in verdicts.items():
        mark = {"ok": "✅", "tie": "➖", "worse": "⚠️ "}[verdict]
        print(f"{mark} full vs {variant}: {verdict}")
    print(f"(ties within {COMPOSITE_TIE_TOLERANCE} composite are non-binding)")
    print(f"report written to {args.out}/ablation_report.txt")
    return 0


if __name__ == "__main__":
    sys.exit(main())
