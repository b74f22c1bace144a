"""Regenerates crates/cli/data/observations.csv.

48 log-spaced states between 100 kOhm and 5 MOhm, energies from the
logarithmic cost model with A = 2.39506e-4 J and B = 7.1853e6 Ohm, and 5%
multiplicative Gaussian noise. Seeded, so the output is reproducible.
"""

import math
import random
from pathlib import Path

A, B = 0.000239506, 7.1853e6
N, LO, HI, NOISE, SEED = 48, 1e5, 5e6, 0.05, 2024

rng = random.Random(SEED)
lines = [
    f"# {N} synthetic SET energy observations: E = A ln(B / r) with A = {A}, B = {B},",
    f"# {NOISE:.0%} multiplicative Gaussian noise, seed {SEED}. Regenerate with scripts/make_observations.py.",
    "r_ohms,e_joules",
]
for k in range(N):
    r = LO * (HI / LO) ** (k / (N - 1))
    e = A * math.log(B / r) * (1.0 + NOISE * rng.gauss(0.0, 1.0))
    lines.append(f"{r:.6e},{e:.6e}")
out = Path(__file__).resolve().parent.parent / "crates" / "cli" / "data" / "observations.csv"
out.write_text("\n".join(lines) + "\n")
