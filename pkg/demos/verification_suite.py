"""Run the full verification suite over a model/potential matrix.

Every inequality and structural claim of the theory is checked on freshly
solved states: the deformed uncertainty relation and its equivalent
algebraic form, the Cramer-Rao bound, the Fisher-information cap, the
linear scaling of the deformed fluctuation measure, homogeneity of the
frozen-coefficient stationary equation, plane-wave transparency and norm
conservation.
"""

import sys

from gupnlse import SuiteConfig, run_all
from gupnlse.checks import format_report_table

reports = run_all(SuiteConfig(betas=(0.0, 1e-4, 1e-2, 1.0)))
print(format_report_table(reports))
sys.exit(0 if all(r.passed for r in reports) else 1)
