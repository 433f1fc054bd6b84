"""Generate the shipped demand/PV series fixtures (forecasts + realizations).

The series are synthetic but engineered to the benchmark narrative: four
seasonal PV regimes, residential MV demand with a double peak, and a summer
midday where distributed PV drives remote feeder nodes past the +5 % voltage
band and mildly reverses feeder (and substation) flows while the grid still
fits inside a +/-7 % band.  Realizations deviate from forecasts through
day-level bias, hourly noise, and a small systematic evening demand
under-forecast, so reserve activations recur in every scenario.

Deterministic under SEED; regenerating overwrites src/bessplan/data/.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

import sys

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from bessplan.scenarios.series import NodalSeries, save_series  # noqa: E402

DATA = Path(__file__).resolve().parent.parent / "src" / "bessplan" / "data"
SEED = 20180101

N_DAYS_PER_SEASON = 21
SEASONS = {  # PV amplitude (fraction of capacity) and daylight half-width (h)
    "winter": (0.16, 4.2),
    "spring": (0.58, 6.2),
    "summer": (0.76, 7.0),
    "autumn": (0.34, 5.0),
}

MV_DEMAND_MVA = {1: 15.3, 3: 0.28, 4: 0.44, 5: 0.75, 6: 0.56, 8: 0.6,
                 10: 0.49, 11: 0.34, 12: 15.3, 14: 0.22}
MV_PV_MWP = {1: 5.7, 2: 5.0, 3: 4.4, 4: 2.2, 5: 1.3, 6: 0.1, 9: 1.1,
             10: 1.6, 11: 5.7, 12: 5.7, 14: 5.0}
MV_PF = 0.9

HV_DEMAND = {5: (35.0, 30.0), 7: (100.0, 50.0)}  # MW, Mvar at nominal
HV_PV_MWP = {5: 40.0}

FORECAST_DAY_SIGMA = 0.05      # day-to-day spread of the forecasts themselves
PV_DAY_BIAS_SIGMA = 0.08       # realization day-level bias vs forecast
PV_HOUR_NOISE = 0.035
DEMAND_DAY_BIAS_SIGMA = 0.03
DEMAND_HOUR_NOISE = 0.015
EVENING_UNDERFORECAST = 0.045  # systematic realization excess, hours 18-22
MIDDAY_PV_EXCESS = 0.07        # systematic PV over-delivery, hours 11-15

HOURS = np.arange(24)


def pv_shape(half_width: float) -> np.ndarray:
    arg = (HOURS - 12.5) * np.pi / (2.0 * half_width)
    shape = np.where(np.abs(HOURS - 12.5) <= half_width, np.cos(arg), 0.0)
    return np.maximum(shape, 0.0) ** 1.3


def residential_shape() -> np.ndarray:
    base = (0.55
            + 0.20 * np.exp(-0.5 * ((HOURS - 8.5) / 2.0) ** 2)
            + 0.15 * np.exp(-0.5 * ((HOURS - 13.0) / 2.5) ** 2)
            + 0.45 * np.exp(-0.5 * ((HOURS - 19.5) / 2.2) ** 2))
    return base / base.max()


def urban_shape() -> np.ndarray:
    base = (0.72
            + 0.24 * np.exp(-0.5 * ((HOURS - 12.0) / 4.0) ** 2)
            + 0.14 * np.exp(-0.5 * ((HOURS - 19.0) / 2.5) ** 2))
    return base / base.max()


def main() -> None:
    rng = np.random.default_rng(SEED)
    season_order = list(SEASONS)
    n_days = N_DAYS_PER_SEASON * len(season_order)

    res_shape = residential_shape()
    urb_shape = urban_shape()
    evening = np.exp(-0.5 * ((HOURS - 20.0) / 1.8) ** 2)
    midday = np.exp(-0.5 * ((HOURS - 13.0) / 1.8) ** 2)

    pv_fc_days, pv_re_days = [], []        # per-day per-unit PV profiles
    dm_fc_days, dm_re_days = [], []        # per-day demand scale profiles
    for season in season_order:
        amp, width = SEASONS[season]
        base = pv_shape(width)
        for _ in range(N_DAYS_PER_SEASON):
            fc_level = amp * max(rng.normal(1.0, FORECAST_DAY_SIGMA), 0.05)
            fc = np.minimum(fc_level * base, 0.95)
            bias = rng.normal(1.0, PV_DAY_BIAS_SIGMA)
            noise = rng.normal(0.0, PV_HOUR_NOISE, 24) * (fc > 0)
            re = fc * bias * (1.0 + MIDDAY_PV_EXCESS * midday) + noise * fc_level
            pv_fc_days.append(fc)
            pv_re_days.append(np.clip(re, 0.0, 0.95))

            d_fc = max(rng.normal(1.0, 0.02), 0.9)
            d_bias = rng.normal(1.0, DEMAND_DAY_BIAS_SIGMA)
            d_noise = rng.normal(0.0, DEMAND_HOUR_NOISE, 24)
            dm_fc_days.append(np.full(24, d_fc))
            dm_re_days.append(
                d_fc * d_bias * (1.0 + EVENING_UNDERFORECAST * evening) + d_noise
            )

    pv_fc = np.concatenate(pv_fc_days)
    pv_re = np.concatenate(pv_re_days)
    dm_fc = np.concatenate(dm_fc_days)
    dm_re = np.concatenate(dm_re_days)

    def per_node_noise(scale):
        return rng.normal(1.0, scale, n_days * 24)

    forecasts, realizations = [], []
    power_factors = {}
    zero = np.zeros(n_days * 24)

    for node, mwp in sorted(MV_PV_MWP.items()):
        forecasts.append(NodalSeries(node, "cigre14", "pv", mwp * pv_fc, zero))
        realizations.append(NodalSeries(
            node, "cigre14", "pv",
            np.clip(mwp * pv_re * per_node_noise(0.02), 0.0, mwp), zero))
    for node, mva in sorted(MV_DEMAND_MVA.items()):
        p_nom = mva * MV_PF
        fc = p_nom * res_shape[np.tile(HOURS, n_days)] * dm_fc
        re = p_nom * res_shape[np.tile(HOURS, n_days)] * dm_re * per_node_noise(0.01)
        q_ratio = np.tan(np.arccos(MV_PF))
        forecasts.append(NodalSeries(node, "cigre14", "demand", fc, fc * q_ratio))
        realizations.append(NodalSeries(node, "cigre14", "demand", re, re * q_ratio))
        power_factors[("cigre14", node, "demand")] = MV_PF

    for node, (p_nom, q_nom) in sorted(HV_DEMAND.items()):
        shape = urb_shape if node == 7 else res_shape
        fc = p_nom * shape[np.tile(HOURS, n_days)] * dm_fc
        re = p_nom * shape[np.tile(HOURS, n_days)] * dm_re * per_node_noise(0.012)
        ratio = q_nom / p_nom
        forecasts.append(NodalSeries(node, "hv", "aggregate", fc, fc * ratio))
        realizations.append(NodalSeries(node, "hv", "aggregate", re, re * ratio))
        power_factors[("hv", node, "aggregate")] = float(round(
            p_nom / np.hypot(p_nom, q_nom), 6))
    for node, mwp in sorted(HV_PV_MWP.items()):
        forecasts.append(NodalSeries(node, "hv", "pv", mwp * pv_fc, zero))
        realizations.append(NodalSeries(
            node, "hv", "pv", np.clip(mwp * pv_re * per_node_noise(0.015), 0.0, mwp),
            zero))

    DATA.mkdir(parents=True, exist_ok=True)
    save_series(forecasts, DATA / "forecasts.csv", DATA / "forecasts.yaml",
                power_factors=power_factors)
    save_series(realizations, DATA / "realizations.csv", DATA / "realizations.yaml",
                power_factors=power_factors)
    print(f"wrote {n_days}-day series fixtures to {DATA}")


if __name__ == "__main__":
    main()
