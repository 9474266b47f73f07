import sys
from pathlib import Path

from hypothesis import HealthCheck, settings

# big-integer curve ops make per-example deadlines meaningless
settings.register_profile(
    "soapsim",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("soapsim")

sys.path.insert(0, str(Path(__file__).parent))
