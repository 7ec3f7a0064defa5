"""Worker count detection for the evaluation pool."""

import logging
import os

DEFAULT_WORKERS = 4

CGROUP_V1_QUOTA = "/sys/fs/cgroup/cpu/cpu.cfs_quota_us"
CGROUP_V1_PERIOD = "/sys/fs/cgroup/cpu/cpu.cfs_period_us"
CGROUP_V2_MAX = "/sys/fs/cgroup/cpu.max"


def _read(path: str) -> str:
    with open(path) as f:
        return f.read().strip()


def _cpus_from_quota(quota: int, period: int, source: str) -> int | None:
    if quota <= 0 or period <= 0:
        return None
    count = max(1, quota // period)
    logging.debug(f"{source} CPU quota detected: quota={quota}, period={period}, count={count}")
    return count


def detect_cpu_count() -> int | None:
    """CPU count granted by the cgroup CPU quota, if one is set."""
    if os.path.exists(CGROUP_V1_QUOTA) and os.path.exists(CGROUP_V1_PERIOD):
        try:
            count = _cpus_from_quota(int(_read(CGROUP_V1_QUOTA)), int(_read(CGROUP_V1_PERIOD)), "cgroup v1")
            if count is not None:
                return count
        except (ValueError, OSError) as e:
            logging.debug(f"cgroup v1 CPU detection failed: {e}")

    if os.path.exists(CGROUP_V2_MAX):
        try:
            content = _read(CGROUP_V2_MAX)
            if not content.startswith("max"):
                quota, period = map(int, content.split())
                return _cpus_from_quota(quota, period, "cgroup v2")
        except (ValueError, OSError) as e:
            logging.debug(f"cgroup v2 CPU detection failed: {e}")

    return None


def detect_worker_count(default: int = DEFAULT_WORKERS) -> int:
    """Evaluation workers to use when none are configured."""
    detected = detect_cpu_count()
    if detected is None:
        logging.info(f"Using default worker count: {default}")
        return default
    return detected
