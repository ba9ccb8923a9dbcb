"""Learn on a synthetic fleet and compare the prediction paths.

Run: python3 demos/fleet_comparison.py [seed]
"""
import sys
import warnings

from assetfail.evaluation import PipelineConfig, bundled_config, compare_modes, generate_fleet
from assetfail.reports import macro_table

seed = int(sys.argv[1]) if len(sys.argv) > 1 else 0
warnings.simplefilter("ignore")

history, truth = generate_fleet(bundled_config().with_seed(seed))
print(f"{len(history.asset_ids)} assets, inspections {sorted({r.inspection_year for r in history.records})}, "
      f"truth year {truth.records[0].inspection_year}")
print(f"failed now: {sum(history.latest().failed)}, failed at truth: {sum(truth.failed)}\n")

results = compare_modes(history, truth, PipelineConfig(seed))
print(macro_table([(m, r.metrics) for m, r in results.items()]))

model = results["predict-long-term"].artifacts["model"]
print(f"\nchosen K={model.aged.base.k}")
for cid, n, age in model.aged.table():
    print(f"  cluster {cid}: {n:4d} rows, conditional age {age:5.1f}")
lg = model.logistic
print(f"logit p = {lg.beta0:.3f} + {lg.beta1:.4f} A_P + {lg.beta2:.4f} A_C")

wb = results["weibull"].artifacts["weibull"]
print(f"Weibull fit on physical age: alpha={wb.alpha:.1f}, beta={wb.beta:.2f}")

# The naive CDF reading of the baseline, for contrast.
naive = compare_modes(history, truth, PipelineConfig(seed, weibull_conditional=False),
                      modes=("weibull",))["weibull"]
print(f"Weibull macro F1: conditional {results['weibull'].metrics.macro.f1:.3f}, "
      f"unconditional {naive.metrics.macro.f1:.3f}")

for p in results["predict-long-term"].artifacts["predictions"][:5]:
    print(f"  {p.asset_id}: A_P {p.physical_age:5.1f} -> A_C {p.conditional_age:5.1f}, "
          f"R {p.rate:.2f} -> {p.future_rate:.2f}, p(fail) {p.probability:.2f}")
