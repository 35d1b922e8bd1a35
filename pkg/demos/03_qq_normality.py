"""QQ normality check on three cohorts: values placed exactly at normal
quantiles, a binomial chance cohort, and a planted bimodal cohort.
"""

import numpy as np

from cardskill.metrics import theoretical_quantile
from cardskill.stattests import qq_test


def show(name, values):
    res = qq_test(values)
    print(f"{name:24s} r2={res.r_squared:.5f} "
          f"max_dev={res.max_abs_deviation:.3f} "
          f"normal_consistent={res.normal_consistent}")


exact = [theoretical_quantile((i - 0.5) / 200) for i in range(1, 201)]
show("exact normal quantiles", exact)

rng = np.random.default_rng(0)
binomial = list(rng.binomial(100, 0.5, size=200) / 100.0)
show("binomial win rates", binomial)

bimodal = [0.2] * 100 + [0.8] * 100
show("bimodal cohort", bimodal)
