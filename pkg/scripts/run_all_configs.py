"""Run every JSON config in ``configs/`` through the CLI into ``out/<name>``."""
import sys
from pathlib import Path

from noisegeo.cli import main

ROOT = Path(__file__).resolve().parent.parent

if __name__ == "__main__":
    threads = sys.argv[1] if len(sys.argv) > 1 else "1"
    status = 0
    for cfg in sorted((ROOT / "configs").glob("*.json")):
        experiment = __import__("json").loads(cfg.read_text())["experiment"]
        print(f"== {cfg.name}")
        rc = main([experiment, "--config", str(cfg), "--out", str(ROOT / "out" / cfg.stem), "--threads", threads])
        status = max(status, rc)
    sys.exit(status)
