# coding: utf-8

# # Self-convergence study
#
# No exact solution is available, so each level is compared with the next
# finer one. Fine grids are restricted by 2x2 averaging, and the error is
# ||e||_2 + ||grad lap e||_2. With s proportional to h the observed order
# should approach two.

# %%

from mpfc.verify import RefinementLadder, run_convergence

ladder = RefinementLadder.space_time(ms=(32, 64, 128, 256), ratio=0.25, T=0.5)
report = run_convergence(ladder)
print(report.summary())
print(report.to_csv())


# A time-only ladder keeps the grid fixed and halves s.

# %%

report = run_convergence(RefinementLadder.time_only(m=128, steps=(10, 20, 40, 80)))
print(report.summary())
print("within [1.8, 2.2]:", report.within(1.8, 2.2))
