"""Synthetic RF world: log-distance path loss with shadowing, device
heterogeneity, temporal drift and AP churn.

A reading of AP ``a`` at RP ``r`` by device ``d`` in CI ``c`` is

    mean_rss(a, r) + shadow(a, r) + fluctuation
        + gain_offset(d) + jitter(d, a) + drift(c)

clamped to [-100, 0] dBm. Readings weaker than -90 dBm before the clamp flip
to -100 with the device's dropout bias, and APs disabled by the churn
schedule read exactly -100 for the whole CI.
"""

import math
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from stellar_loc.lib import rng
from stellar_loc.lib.dataset import merge
from stellar_loc.models import (
    RSS_CEIL_DBM,
    RSS_FLOOR_DBM,
    Fingerprint,
    FingerprintDataset,
    ReferencePoint,
)

WEAK_SIGNAL_DBM = -90.0


@dataclass(frozen=True)
class PathLoss:
    """Log-distance model: p0 dBm at d0 = 1 m, exponent n, shadowing sigma in dB.

    ``fluctuation_sigma`` is the per-reading short-term variation.
    """

    p0: float = -40.0
    n: float = 3.0
    shadow_sigma: float = 4.0
    fluctuation_sigma: float = 2.0
    d0: float = 1.0


@dataclass(frozen=True)
class EnvironmentModel:
    """A building: RPs along a line, APs at fixed 2-D positions."""

    building_id: str
    extent: tuple[float, float]
    rp_positions: tuple[tuple[float, float], ...]
    ap_positions: tuple[tuple[float, float], ...]
    ap_ids: tuple[str, ...]
    pathloss: PathLoss = field(default_factory=PathLoss)
    seed: int = 0

    def __post_init__(self) -> None:
        if self.pathloss.n <= 0:
            raise ValueError("path-loss exponent must be positive")
        if self.pathloss.shadow_sigma < 0 or self.pathloss.fluctuation_sigma < 0:
            raise ValueError("noise sigmas must be non-negative")
        if len(self.ap_positions) < 1 or len(self.rp_positions) < 2:
            raise ValueError("need at least 1 AP and 2 RPs")
        if len(self.ap_ids) != len(self.ap_positions):
            raise ValueError("one id per AP position")

    @property
    def rps(self) -> tuple[ReferencePoint, ...]:
        width = len(str(len(self.rp_positions) - 1))
        return tuple(
            ReferencePoint(f"rp-{i:0{width}d}", x, y) for i, (x, y) in enumerate(self.rp_positions)
        )


@dataclass(frozen=True)
class DeviceProfile:
    """Per-device RSS distortion: additive gain, per-AP bias, weak-signal loss."""

    device_id: str
    gain_offset: float = 0.0
    per_ap_jitter_sigma: float = 0.0
    dropout_bias: float = 0.0

    def __post_init__(self) -> None:
        if self.per_ap_jitter_sigma < 0:
            raise ValueError("per_ap_jitter_sigma must be non-negative")
        if not 0.0 <= self.dropout_bias <= 1.0:
            raise ValueError("dropout_bias must lie in [0, 1]")


@dataclass(frozen=True)
class TemporalSchedule:
    """Per-CI disabled AP indices and slow drift offsets (dB)."""

    disabled: tuple[frozenset[int], ...]
    drift_db: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.disabled) != len(self.drift_db):
            raise ValueError("disabled sets and drift offsets must cover the same CIs")

    @property
    def cis(self) -> range:
        return range(len(self.disabled))


def line_environment(
    building_id: str,
    num_rps: int,
    num_aps: int,
    seed: int,
    *,
    spacing: float = 1.0,
    margin: float = 5.0,
    half_width: float = 8.0,
    pathloss: PathLoss | None = None,
) -> EnvironmentModel:
    """RPs on a corridor at ``spacing`` meters, APs scattered around it."""
    length = spacing * (num_rps - 1)
    gen = rng.stream(seed, "geometry", building_id)
    xs = gen.uniform(-margin, length + margin, size=num_aps)
    ys = gen.uniform(-half_width, half_width, size=num_aps)
    octets = gen.integers(0, 256, size=(num_aps, 5))
    ap_ids = tuple(
        "02:" + ":".join(f"{int(o):02x}" for o in row[:4]) + f":{i % 256:02x}"
        for i, row in enumerate(octets)
    )
    return EnvironmentModel(
        building_id=building_id,
        extent=(length + 2 * margin, 2 * half_width),
        rp_positions=tuple((i * spacing, 0.0) for i in range(num_rps)),
        ap_positions=tuple((float(x), float(y)) for x, y in zip(xs, ys)),
        ap_ids=ap_ids,
        pathloss=pathloss or PathLoss(),
        seed=seed,
    )


def mean_rss(env: EnvironmentModel, ap: int, rp: int) -> float:
    """Noise-free received power of AP ``ap`` at RP ``rp`` in dBm."""
    pl = env.pathloss
    ax, ay = env.ap_positions[ap]
    rx, ry = env.rp_positions[rp]
    d = max(math.hypot(ax - rx, ay - ry), pl.d0)
    value = pl.p0 - 10.0 * pl.n * math.log10(d / pl.d0)
    return min(max(value, RSS_FLOOR_DBM), RSS_CEIL_DBM)


def _mean_map(env: EnvironmentModel) -> np.ndarray:
    """R x M matrix of ``mean_rss`` before clamping plus static shadowing."""
    pl = env.pathloss
    rp = np.asarray(env.rp_positions, dtype=np.float64)
    ap = np.asarray(env.ap_positions, dtype=np.float64)
    d = np.linalg.norm(rp[:, None, :] - ap[None, :, :], axis=2)
    d = np.maximum(d, pl.d0)
    base = pl.p0 - 10.0 * pl.n * np.log10(d / pl.d0)
    shadow = rng.stream(env.seed, "shadow", env.building_id).normal(0.0, 1.0, size=base.shape)
    return base + pl.shadow_sigma * shadow


def churn_schedule(
    num_aps: int,
    phases: Sequence[tuple[int, float]],
    seed: int,
    *,
    drift_step_db: float = 0.5,
    nested: bool = False,
) -> TemporalSchedule:
    """Build a schedule from ``(num_cis, disabled_fraction)`` phases.

    Each phase disables ``floor(fraction * num_aps)`` APs. The subset is
    re-drawn per phase, or grown from the previous phase's subset when
    ``nested``. Drift is a seeded random walk with ``drift_step_db`` steps,
    starting at 0 dB in CI 0.
    """
    disabled: list[frozenset[int]] = []
    order = rng.stream(seed, "churn", "nested").permutation(num_aps)
    for phase, (num_cis, fraction) in enumerate(phases):
        count = math.floor(fraction * num_aps)
        if nested:
            chosen = frozenset(int(i) for i in order[:count])
        else:
            picks = rng.stream(seed, "churn", phase).permutation(num_aps)[:count]
            chosen = frozenset(int(i) for i in picks)
        disabled.extend([chosen] * num_cis)

    steps = rng.stream(seed, "drift").normal(0.0, drift_step_db, size=len(disabled))
    steps[0] = 0.0
    drift = tuple(float(v) for v in np.cumsum(steps))
    return TemporalSchedule(tuple(disabled), drift)


def generate_slice(
    env: EnvironmentModel,
    device: DeviceProfile,
    schedule: TemporalSchedule,
    ci: int,
    fingerprints_per_rp: int,
    seed: int,
    *,
    mean_map: np.ndarray | None = None,
) -> FingerprintDataset:
    """Fingerprints of one (device, CI) slice, ``fingerprints_per_rp`` per RP."""
    base = _mean_map(env) if mean_map is None else mean_map
    num_rps, num_aps = base.shape
    pl = env.pathloss

    jitter = rng.stream(seed, "jitter", device.device_id).normal(
        0.0, device.per_ap_jitter_sigma, size=num_aps
    )
    gen = rng.stream(seed, "slice", device.device_id, ci)
    fluct = gen.normal(0.0, pl.fluctuation_sigma, size=(num_rps, fingerprints_per_rp, num_aps))
    flips = gen.random(size=(num_rps, fingerprints_per_rp, num_aps))

    raw = (
        base[:, None, :]
        + fluct
        + device.gain_offset
        + jitter[None, None, :]
        + schedule.drift_db[ci]
    )
    readings = np.clip(raw, RSS_FLOOR_DBM, RSS_CEIL_DBM)
    readings[(raw < WEAK_SIGNAL_DBM) & (flips < device.dropout_bias)] = RSS_FLOOR_DBM
    off = sorted(schedule.disabled[ci])
    if off:
        readings[:, :, off] = RSS_FLOOR_DBM

    rps = env.rps
    records = tuple(
        Fingerprint(
            tuple(float(v) for v in readings[r, k]),
            rps[r].rp_id,
            device.device_id,
            ci,
        )
        for r in range(num_rps)
        for k in range(fingerprints_per_rp)
    )
    return FingerprintDataset(env.building_id, env.ap_ids, rps, records)


def generate(
    env: EnvironmentModel,
    devices: Sequence[DeviceProfile],
    schedule: TemporalSchedule,
    fingerprints_per_rp: int,
    seed: int,
) -> dict[tuple[str, int], FingerprintDataset]:
    """One dataset per (device, CI) for every CI the schedule covers.

    Slices own independent streams keyed by (seed, device, ci), so the output
    does not depend on generation order.
    """
    base = _mean_map(env)
    return {
        (device.device_id, ci): generate_slice(
            env, device, schedule, ci, fingerprints_per_rp, seed, mean_map=base
        )
        for device in devices
        for ci in schedule.cis
    }


def merge_slices(slices: dict[tuple[str, int], FingerprintDataset]) -> FingerprintDataset:
    """Combine per-(device, CI) output into one building dataset, CI-major."""
    ordered = sorted(slices.items(), key=lambda kv: (kv[0][1], kv[0][0]))
    return merge(ds for _, ds in ordered)


# =============================================================================
# Default benchmark
# =============================================================================

BENCHMARK_RPS = 16
BENCHMARK_APS = 40
BENCHMARK_FINGERPRINTS_PER_RP = 6
# (number of CIs, disabled fraction): none up to CI 2, then 20%, 40%, 60%.
BENCHMARK_PHASES: tuple[tuple[int, float], ...] = ((3, 0.0), (7, 0.2), (6, 0.4), (1, 0.6))

BENCHMARK_DEVICES = (
    DeviceProfile("dev-a", gain_offset=0.0, per_ap_jitter_sigma=1.5, dropout_bias=0.1),
    DeviceProfile("dev-b", gain_offset=-7.0, per_ap_jitter_sigma=2.5, dropout_bias=0.3),
    DeviceProfile("dev-c", gain_offset=5.0, per_ap_jitter_sigma=2.0, dropout_bias=0.05),
    DeviceProfile("dev-d", gain_offset=-12.0, per_ap_jitter_sigma=3.0, dropout_bias=0.4),
)


@dataclass(frozen=True)
class BenchmarkBuilding:
    env: EnvironmentModel
    devices: tuple[DeviceProfile, ...]
    schedule: TemporalSchedule
    dataset: FingerprintDataset


def benchmark_building(building: str, seed: int) -> BenchmarkBuilding:
    """One building of the default benchmark; geometry and noise derive from ``seed``."""
    building_seed = int(rng.stream(seed, "building", building).integers(0, 2**62))
    env = line_environment(f"building-{building}", BENCHMARK_RPS, BENCHMARK_APS, building_seed)
    schedule = churn_schedule(BENCHMARK_APS, BENCHMARK_PHASES, building_seed)
    slices = generate(
        env, BENCHMARK_DEVICES, schedule, BENCHMARK_FINGERPRINTS_PER_RP, building_seed
    )
    return BenchmarkBuilding(env, BENCHMARK_DEVICES, schedule, merge_slices(slices))


def default_benchmark(seed: int) -> dict[str, BenchmarkBuilding]:
    """Two-building suite: 16 RPs at 1 m, 40 APs, 4 devices, 17 CIs each."""
    return {name: benchmark_building(name, seed) for name in ("A", "B")}
