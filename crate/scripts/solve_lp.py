#!/usr/bin/env python3
"""Solve an LP-format integer program written by `hdats export-ilp`.

Reads the subset of the CPLEX LP format the exporter emits (one constraint
per line, integer coefficients) and solves it with scipy's HiGHS-backed
`milp`. Prints `status <name>` and, when optimal, `objective <value>`.

Exit status: 0 optimal, 3 not optimal, 4 scipy missing.
"""

import re
import sys

SECTIONS = {"minimize", "maximize", "subject to", "bounds", "general", "binary", "end"}
TERM = re.compile(r"([+-]?)\s*(\d+\s+)?([A-Za-z_][\w.\[\],]*)")


def parse_terms(text):
    return [(int(c or 1) * (-1 if s == "-" else 1), v) for s, c, v in TERM.findall(text)]


def parse(path):
    model = {"sense": 1, "obj": [], "rows": [], "bounds": {}, "ints": set(), "bins": set()}
    section = None
    pending = ""
    with open(path, encoding="utf-8") as f:
        for raw in f:
            line = raw.strip()
            if not line or line.startswith("\\"):
                continue
            if line.lower() in SECTIONS:
                section = line.lower()
                if section == "maximize":
                    model["sense"] = -1
                continue
            if section in ("minimize", "maximize"):
                model["obj"] += parse_terms(line.split(":", 1)[-1])
            elif section == "subject to":
                # Long constraints continue on the following lines.
                pending += " " + line
                end = re.match(r"\s*([^:]+):(.*?)(<=|>=|=)\s*(-?\d+)\s*$", pending)
                if end:
                    name, body, sense, rhs = end.groups()
                    model["rows"].append((name.strip(), parse_terms(body), sense, int(rhs)))
                    pending = ""
            elif section == "bounds":
                parts = line.split()
                if len(parts) == 5:
                    model["bounds"][parts[2]] = (int(parts[0]), int(parts[4]))
                elif parts[1] == "free":
                    model["bounds"][parts[0]] = (None, None)
                elif parts[1] == ">=":
                    model["bounds"][parts[0]] = (int(parts[2]), None)
                else:
                    model["bounds"][parts[0]] = (0, int(parts[2]))
            elif section == "general":
                model["ints"].update(line.split())
            elif section == "binary":
                model["bins"].update(line.split())
    return model


def main():
    if len(sys.argv) != 2:
        print("usage: solve_lp.py MODEL.lp", file=sys.stderr)
        return 1
    try:
        import numpy as np
        from scipy.optimize import Bounds, LinearConstraint, milp
        from scipy.sparse import lil_matrix
    except ImportError:
        print("status unavailable")
        return 4
    m = parse(sys.argv[1])
    names = sorted(
        {v for _, v in m["obj"]}
        | {v for _, terms, _, _ in m["rows"] for _, v in terms}
        | set(m["bounds"]) | m["ints"] | m["bins"]
    )
    index = {v: i for i, v in enumerate(names)}
    n = len(names)
    c = np.zeros(n)
    for k, v in m["obj"]:
        c[index[v]] += k * m["sense"]
    lo = np.zeros(n)
    hi = np.full(n, np.inf)
    for v, (a, b) in m["bounds"].items():
        lo[index[v]] = -np.inf if a is None else a
        hi[index[v]] = np.inf if b is None else b
    for v in m["bins"]:
        lo[index[v]], hi[index[v]] = max(lo[index[v]], 0), min(hi[index[v]], 1)
    integrality = np.zeros(n)
    for v in m["ints"] | m["bins"]:
        integrality[index[v]] = 1
    a = lil_matrix((len(m["rows"]), n))
    rlo = np.empty(len(m["rows"]))
    rhi = np.empty(len(m["rows"]))
    for r, (_, terms, sense, rhs) in enumerate(m["rows"]):
        for k, v in terms:
            a[r, index[v]] += k
        rlo[r] = rhs if sense in (">=", "=") else -np.inf
        rhi[r] = rhs if sense in ("<=", "=") else np.inf
    cons = [LinearConstraint(a.tocsr(), rlo, rhi)] if m["rows"] else []
    # The HiGHS presolve bundled with scipy 1.15 reports some of these
    # models infeasible although they have feasible points. The models are
    # tiny, so solve without it.
    res = milp(c, constraints=cons, integrality=integrality, bounds=Bounds(lo, hi), options={"presolve": False})
    if res.status != 0:
        print(f"status {res.message}")
        return 3
    print("status optimal")
    print(f"objective {round(res.fun * m['sense'])}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
