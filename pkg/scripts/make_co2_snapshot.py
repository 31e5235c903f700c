"""Regenerate the bundled Mauna Loa monthly CO2 snapshot.

The bundled file is an offline reconstruction in the NOAA
``co2_mm_mlo.txt`` format: a quadratic growth curve anchored at three
published monthly means (Mar 1958, Jan 1995, Mar 2016), the mean
seasonal cycle of the observatory, slow interannual wiggles, and a small
seeded measurement-noise term. It stands in for the real download so the
CO2 study and its tests run without network access; use
``gphcrb.co2.fetch_snapshot`` to replace it with the live NOAA file.

Run from the repository root:

    python scripts/make_co2_snapshot.py
"""

import pathlib

import numpy as np

OUT = pathlib.Path(__file__).resolve().parents[1] / "src" / "gphcrb" / "data" / "co2_mm_mlo.txt"

FIRST = (1958, 3)
LAST = (2016, 12)

# Approximate MLO mean seasonal anomalies by month (ppm), zero-meaned below.
SEASONAL = np.array(
    [0.20, 0.95, 1.75, 2.70, 3.05, 2.30, 0.55, -1.55, -3.20, -3.30, -2.05, -0.75]
)
SEASONAL = SEASONAL - SEASONAL.mean()

# (year, month, published monthly mean) anchors for the growth curve.
ANCHORS = [(1958, 3, 315.70), (1995, 1, 359.92), (2016, 3, 404.83)]

# Months missing in the historical record; emitted with the -99.99 sentinel.
MISSING = {(1958, 6), (1958, 10), (1964, 2), (1964, 3), (1964, 4)}

HEADER = """\
# --------------------------------------------------------------------
# Mauna Loa monthly mean CO2 snapshot (reconstructed, offline)
#
# Format-compatible with NOAA ESRL co2_mm_mlo.txt. This file is a
# deterministic reconstruction generated by scripts/make_co2_snapshot.py
# (quadratic growth anchored at published monthly means, mean seasonal
# cycle, interannual wiggle, seeded noise); it is NOT a NOAA download.
# Replace it via gphcrb.co2.fetch_snapshot() when network is available.
#
# Missing monthly averages are denoted by -99.99; the interpolated
# column provides a filled value for those months.
#
# year  month  decimal_date  average  interpolated  trend  days
# --------------------------------------------------------------------
"""


def month_iter():
    y, m = FIRST
    while (y, m) <= LAST:
        yield y, m
        m += 1
        if m > 12:
            y, m = y + 1, 1


def main():
    months = list(month_iter())
    t = np.array([y + (m - 0.5) / 12.0 for y, m in months])
    u = t - 1958.0
    rng = np.random.default_rng(20160331)
    # interannual variability: slow cycles plus an AR(1) component with a
    # ~6 month memory, roughly matching the +-0.3 ppm irregular structure
    # of the real monthly series
    ar = np.empty(u.size)
    ar[0] = rng.normal(0.0, 0.25)
    for i in range(1, u.size):
        ar[i] = 0.75 * ar[i - 1] + rng.normal(0.0, 0.17)
    wiggle = (
        0.35 * np.sin(2 * np.pi * u / 3.57 + 0.8)
        + 0.25 * np.sin(2 * np.pi * u / 7.4 + 2.0)
        + ar
        + rng.normal(0.0, 0.10, size=u.size)
    )
    seasonal = np.array([SEASONAL[m - 1] for _, m in months])

    # Quadratic a + b u + c u^2 through the anchors net of the other terms.
    idx = {ym: i for i, ym in enumerate(months)}
    rows, rhs = [], []
    for ay, am, target in ANCHORS:
        i = idx[(ay, am)]
        rows.append([1.0, u[i], u[i] ** 2])
        rhs.append(target - seasonal[i] - wiggle[i])
    a, b, c = np.linalg.solve(np.array(rows), np.array(rhs))
    trend = a + b * u + c * u * u

    values = trend + seasonal + wiggle
    lines = [HEADER]
    for i, (y, m) in enumerate(months):
        val = values[i]
        missing = (y, m) in MISSING
        avg = -99.99 if missing else val
        days = -1 if missing else 30
        lines.append(
            f"{y:6d} {m:4d}    {t[i]:9.4f}   {avg:8.2f}   {val:8.2f}   "
            f"{trend[i] + wiggle[i]:8.2f}  {days:4d}\n"
        )
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text("".join(lines))
    print(f"wrote {OUT} ({len(months)} months, {t[0]:.3f}..{t[-1]:.3f})")


if __name__ == "__main__":
    main()
