"""
Overfit Experiment
Trains the small model on 8 synthetic clips at 10 dB and checks that detection
and enhancement both fit the training set
"""

import argparse
import sys

from dotenv import load_dotenv

from adenet.config import load_run_config
from adenet.harness.experiments import OVERFIT_MIN_AUC, OVERFIT_MIN_SI_SDRI_DB, overfit_experiment
from adenet.log import configure_logging
from adenet.signalio import load_corpus_config


def main() -> int:
    parser = argparse.ArgumentParser(description="overfit the small model on 8 clips")
    parser.add_argument("--config", default="demo-data/overfit-config.json")
    parser.add_argument("--corpus-config", default="demo-data/overfit-corpus.json")
    parser.add_argument("--out", default="runs/overfit")
    args = parser.parse_args()

    load_dotenv()
    configure_logging()

    print("Overfit Experiment")
    print("=" * 50)
    result = overfit_experiment(
        load_run_config(args.config), load_corpus_config(args.corpus_config), args.out
    )
    report = result.report

    print(f"steps:        {result.steps}")
    print(f"frame AUC:    {report.auc:.4f}  (need >= {OVERFIT_MIN_AUC})")
    si_sdri = "na" if report.si_sdri_db is None else f"{report.si_sdri_db:.2f} dB"
    print(f"SI-SDRi:      {si_sdri}  (need >= {OVERFIT_MIN_SI_SDRI_DB} dB)")
    print("=" * 50)
    print("✅ PASSED" if result.passed else "❌ FAILED")
    return 0 if result.passed else 1


if __name__ == "__main__":
    sys.exit(main())
