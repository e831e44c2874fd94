"""Run the school-performance case study against a local data file.

Needs the semicolon-delimited Portuguese-class file (student-por.csv, 649
rows) from the UCI "Student Performance" collection. Pass its path on the
command line or drop it at data/student-por.csv. Nothing is downloaded.
"""

import argparse
import os
import sys

from pocause import format_student_report, reproduce_student

parser = argparse.ArgumentParser()
parser.add_argument("path", nargs="?", default=None,
                    help="student-por.csv (defaults to data/student-por.csv "
                         "or POC_STUDENT_DATA)")
parser.add_argument("--variant", default="joint",
                    choices=("joint", "studytime", "paid"))
parser.add_argument("--bootstrap", type=int, default=1000)
parser.add_argument("--seed", type=int, default=0)
args = parser.parse_args()

path = args.path or os.environ.get("POC_STUDENT_DATA") or "data/student-por.csv"
if not os.path.exists(path):
    sys.exit(f"no data file at {path}; download student-por.csv from the UCI "
             "repository and pass its path")

report = reproduce_student(path, variant=args.variant,
                           n_boot=args.bootstrap, seed=args.seed)
print(format_student_report(report))
