"""Regenerate the model files under models/ from the built-in fixtures."""

from pathlib import Path

from relnodes.io import write_model
from relnodes.synthesis import chain_bn, cg_counterexample, selection_bias_model, xor_or_model

OUT = Path(__file__).resolve().parent.parent / "models"


def main() -> None:
    OUT.mkdir(exist_ok=True)
    bn, _ = selection_bias_model()
    write_model(OUT / "selection_bias.json", bn, selection={"S": 0.0})
    write_model(OUT / "chain.json", chain_bn())
    write_model(OUT / "xor_or.json", xor_or_model())
    write_model(OUT / "cg.json", cg_counterexample())


if __name__ == "__main__":
    main()
