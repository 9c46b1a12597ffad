#!/usr/bin/env python3
"""External MILP backend for gridrestore built on highspy.

Usage: highs_solve.py MODEL.mps TIME_LIMIT REL_GAP SOLUTION_FILE

Writes the gridrestore solution-file format: a status line, the objective
(minimization sense, as in the MPS file), the best bound, and one
`column value` line per column.
"""

import sys

import highspy


def main(argv):
    if len(argv) != 5:
        print(__doc__, file=sys.stderr)
        return 2
    mps_path, time_limit, rel_gap, sol_path = argv[1], float(argv[2]), float(argv[3]), argv[4]

    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("time_limit", max(time_limit, 1e-3))
    h.setOptionValue("mip_rel_gap", rel_gap)
    h.setOptionValue("threads", 1)
    if h.readModel(mps_path) != highspy.HighsStatus.kOk:
        return 3
    h.run()

    status = h.getModelStatus()
    info = h.getInfo()
    lp = h.getLp()
    solution = h.getSolution()
    with open(sol_path, "w") as out:
        if status == highspy.HighsModelStatus.kInfeasible:
            out.write("status infeasible\n")
            return 0
        if not solution.value_valid:
            out.write("status failure\n")
            return 0
        optimal = status == highspy.HighsModelStatus.kOptimal
        out.write("status %s\n" % ("optimal" if optimal else "feasible"))
        out.write("objective %.17g\n" % info.objective_function_value)
        if lp.integrality_ and info.mip_dual_bound == info.mip_dual_bound:
            out.write("bound %.17g\n" % info.mip_dual_bound)
        for name, value in zip(lp.col_names_, solution.col_value):
            out.write("%s %.17g\n" % (name, value))
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
