"""Compensation payoff across dropout rates.

Sweeps the Bernoulli loss probability and reports, for each rate, how
the predictive buffer compares with holding the last input over a set
of paired loss realizations.
"""

import argparse
import json

from ncsim.runtime import HOLD_LAST_VALUE, PREDICTIVE_BUFFER, compare_strategies
from ncsim.scenario import apply_overrides, builtin_scenario_dict, scenario_from_dict


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--rates", default="0.1,0.3,0.5", help="comma-separated loss probabilities")
    parser.add_argument("--seeds", type=int, default=20, help="paired realizations per rate")
    parser.add_argument("--workers", type=int, default=1)
    args = parser.parse_args()

    rates = [float(tok) for tok in args.rates.split(",")]
    print(f"{'p_loss':>7} {'median J pred':>15} {'median J hold':>15} {'wins':>9}")
    for rate in rates:
        loss = json.dumps({"kind": "bernoulli", "p": rate, "seed": 42})
        doc = apply_overrides(builtin_scenario_dict("tank-reference"), [f"loss={loss}"])
        sc = scenario_from_dict(doc)
        result = compare_strategies(
            sc,
            strategies=(PREDICTIVE_BUFFER, HOLD_LAST_VALUE),
            n_seeds=args.seeds,
            workers=args.workers,
        )
        pred = result.median_cost(PREDICTIVE_BUFFER)
        hold = result.median_cost(HOLD_LAST_VALUE)
        wins = result.count_wins(PREDICTIVE_BUFFER, HOLD_LAST_VALUE)
        print(f"{rate:7.2f} {pred:15.4g} {hold:15.4g} {wins:5d}/{args.seeds}")


if __name__ == "__main__":
    main()
