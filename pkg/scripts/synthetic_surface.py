"""Generate an implied-vol quote file from a model's transform prices.

Stands in for market quotes: the output uses the same CSV schema that
``levy-quant calibrate --quotes`` reads.  Optional Gaussian noise (in vol
points) makes the round trip less trivial.
"""
from __future__ import annotations

import argparse
import json
from dataclasses import dataclass, replace

import numpy as np

from levy_quant.calibrate import synthetic_quotes
from levy_quant.marketdata import VolQuote, write_quotes
from levy_quant.measure_change import MarketEnv, risk_neutralize
from levy_quant.model_zoo import NIG, ModelParams, params_from_dict


@dataclass
class SurfaceConfig:
    model: ModelParams = NIG(6.0, -2.0, 0.4)
    r: float = 0.05
    div: float = 0.0
    S0: float = 100.0
    maturities: tuple = (0.25, 0.5, 1.0)
    moneyness: tuple = (0.8, 0.9, 1.0, 1.1, 1.2)
    noise: float = 0.0
    seed: int = 0


def build(cfg: SurfaceConfig) -> list[VolQuote]:
    env = MarketEnv(cfg.r, cfg.div, cfg.S0)
    model = risk_neutralize(cfg.model, env)
    quotes = synthetic_quotes(model, env, list(cfg.maturities), [cfg.S0 * k for k in cfg.moneyness])
    if cfg.noise > 0:
        rng = np.random.default_rng(cfg.seed)
        quotes = [replace(q, implied_vol=max(q.implied_vol + cfg.noise * rng.standard_normal(), 1e-4))
                  for q in quotes]
    return quotes


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("out", help="quote CSV to write")
    ap.add_argument("--model", help="JSON file with a 'family' key and parameters (default NIG(6, -2, 0.4))")
    ap.add_argument("--noise", type=float, default=0.0, help="vol noise standard deviation")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    cfg = SurfaceConfig(noise=args.noise, seed=args.seed)
    if args.model:
        with open(args.model) as fh:
            data = json.load(fh)
        cfg.model = params_from_dict(data.get("params", data))
    quotes = build(cfg)
    write_quotes(args.out, quotes)
    print(f"wrote {len(quotes)} quotes from {cfg.model} to {args.out}")


if __name__ == "__main__":
    main()
