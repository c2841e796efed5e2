"""
Secrecy rate against transmit power
===================================

A small Monte Carlo power sweep at desk scale.  Every scheme sees the same
channel draws at every power level, so differences between schemes are
paired.  Ten draws keep this under a few minutes; the acceptance suite uses
fifty.  The same numbers can be produced as CSV with::

    secureas run --config demos/desk.ini --sweep power --values 0,5,10 --out results
"""

from secureas.sim import desk_profile, run_scenario

spec = desk_profile(sweep="power", sweep_values=(0.0, 5.0, 10.0), num_realizations=10)
result = run_scenario(spec)

schemes = spec.schemes
print("p (dBm) " + "".join(f"{s:>14s}" for s in schemes))
for p in spec.sweep_values:
    cells = [result.cell(p, s) for s in schemes]
    print(f"{p:7.1f} " + "".join(f"{c.mean:8.3f}+-{c.stderr:4.2f}" for c in cells))

# per-solve cost, which is where the schemes differ most
print("\nmean seconds per solve at 10 dBm:")
for s in schemes:
    secs = result.cell(10.0, s).seconds
    print(f"  {s:7s} {sum(secs) / len(secs):.3f}")
