# coding: utf-8

# # Energy decay for any step size
#
# The modified energy must not increase, whatever the step size. The probe runs
# 100 steps for step sizes spread over four decades and reports the worst
# increase next to the allowed solver slack.

# %%

from mpfc.grid import Params
from mpfc.verify import default_initial_data, run_stability_probe

p = Params.square(64, 32.0, 0.1)
results = run_stability_probe(default_initial_data(p), p, [1e-3, 1e-1, 1.0, 10.0], nsteps=100)
for r in results:
    print(f"s={r.s:<6g} passed={r.passed}  max increase={r.max_increase: .2e}  "
          f"max residual={r.max_residual:.2e}  slack={r.slack:.2e}  "
          f"energy {r.modified[0]:.6e} -> {r.modified[-1]:.6e}")


# The identity and inequality oracles run in about a second.

# %%

from mpfc.verify import oracle_suite

for result in oracle_suite():
    print(result.line())
