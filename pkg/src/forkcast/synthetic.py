"""Deterministic synthetic datasets for tests, demos and the pipeline.

The generated files follow the ingest CSV formats exactly.  The reference
miner population is a concentrated 35-miner split of 20,000 blocks whose
estimated rate moments sit at the operating point used throughout the
test-suite (mean ~5e-5 blocks/s, std ~1e-4 blocks/s at a total rate of
0.0017 blocks/s), with the largest miner holding roughly a 31% share.
"""

from __future__ import annotations

import csv
import datetime as dt
from pathlib import Path

import numpy as np

__all__ = [
    "REFERENCE_COUNTS",
    "REFERENCE_LAMBDA",
    "REFERENCE_BITS",
    "REFERENCE_HASHRATE",
    "STALES_PER_PERIOD",
    "write_dataset",
]

# 35 miners, 20,000 blocks, descending
REFERENCE_COUNTS = (
    6295, 2366, 2335, 1474, 1349, 1171, 781, 712, 610, 610, 471, 293, 283,
    275, 261, 210, 99, 87, 76, 68, 41, 34, 29, 28, 15, 9, 5, 4, 2, 2, 1, 1,
    1, 1, 1,
)

REFERENCE_LAMBDA = 0.0017  # blocks/s
REFERENCE_HASHRATE = 1.7e18  # hashes/s
# compact encoding of a target whose expected hash count is ~1e21, so the
# reference hash rate lands at the reference total block rate
REFERENCE_BITS = 0x1804B8ED
STALES_PER_PERIOD = 56
BLOCK_SPACING = 588  # seconds, ~1/REFERENCE_LAMBDA

_EPOCH = int(dt.datetime(2023, 1, 2, tzinfo=dt.timezone.utc).timestamp())


def _miner_sequence(rng: np.random.Generator, n_blocks: int) -> list[str]:
    ids = [f"pool{i:02d}" for i in range(len(REFERENCE_COUNTS))]
    seq: list[str] = []
    for mid, count in zip(ids, REFERENCE_COUNTS):
        seq.extend([mid] * count)
    assert len(seq) == n_blocks
    rng.shuffle(seq)
    return seq


def write_dataset(
    out_dir: str | Path,
    periods: int = 3,
    blocks_per_period: int = 20_000,
    seed: int = 20230102,
) -> dict[str, Path]:
    """Write blocks/stale/propagation/hashrate CSVs; returns their paths.

    Every period re-uses the reference miner split (shuffled block
    ordering per period) and carries exactly ``STALES_PER_PERIOD`` distinct
    stale heights plus a couple of duplicate reports.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.Generator(np.random.Philox(key=seed))
    n_blocks = periods * blocks_per_period

    paths = {
        "blocks": out / "blocks.csv",
        "stale": out / "stale.csv",
        "propagation": out / "propagation.csv",
        "hashrate": out / "hashrate.csv",
    }

    with paths["blocks"].open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["height", "timestamp", "bits", "miner_id"])
        for p in range(periods):
            miners = _miner_sequence(rng, blocks_per_period)
            for i, mid in enumerate(miners):
                height = p * blocks_per_period + i
                ts = _EPOCH + height * BLOCK_SPACING
                w.writerow([height, ts, f"{REFERENCE_BITS:#010x}", mid])

    with paths["stale"].open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["height"])
        for p in range(periods):
            lo = p * blocks_per_period
            heights = rng.choice(blocks_per_period, STALES_PER_PERIOD, replace=False)
            heights = sorted(int(h) + lo for h in heights)
            for h in heights:
                w.writerow([h])
            # duplicate reports of already-listed heights must not count twice
            w.writerow([heights[0]])
            w.writerow([heights[-1]])

    span = n_blocks * BLOCK_SPACING
    with paths["propagation"].open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["timestamp", "p50", "p90", "p99"])
        for ts in range(_EPOCH, _EPOCH + span + 1, 3600):
            w.writerow([ts, "0.815", "2.0", "9.0"])

    first_day = dt.datetime.fromtimestamp(_EPOCH, dt.timezone.utc).date()
    n_days = span // 86400 + 2
    with paths["hashrate"].open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["date", "hashes_per_second"])
        for d in range(n_days):
            day = first_day + dt.timedelta(days=d)
            w.writerow([day.isoformat(), f"{REFERENCE_HASHRATE:.6e}"])

    return paths
