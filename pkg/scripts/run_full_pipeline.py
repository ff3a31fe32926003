import os
import sys
import tempfile

# Add the project root to the python path to allow importing edgeids modules
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from edgeids.app.core.config import get_settings
from edgeids.main import run


def walkthrough(out_dir):
    """Train, evaluate, select, benchmark, cost and report on the example configuration."""
    settings = get_settings()
    config = str(settings.fixture(settings.DEFAULT_RUN_CONFIG))
    steps = [
        ["train"],
        ["eval"],
        ["select"],
        ["bench", "--rows", "2000"],
        ["cost", "--reuse-factors", "1,2,4,8,16,32", "--calibrate",
         "--plot", os.path.join(out_dir, "sweep.png")],
        ["report"],
    ]
    for step in steps:
        print(f"\n== edgeids {' '.join(step)}")
        code = run(["--config", config, "--out", out_dir, *step])
        if code != 0:
            print(f"Step '{step[0]}' failed with exit code {code}")
            return code
    print(f"\nReport written to {os.path.join(out_dir, 'report.md')}")
    return 0


if __name__ == "__main__":
    target = sys.argv[1] if len(sys.argv) > 1 else tempfile.mkdtemp(prefix="edgeids-")
    sys.exit(walkthrough(target))
