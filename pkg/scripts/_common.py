import argparse
import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))


def parser(default_config: str, description: str) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--config", default=str(ROOT / "configs" / default_config))
    p.add_argument("--out", default=None, help="report directory (default: results/<config stem>)")
    p.add_argument("--replications", type=int, default=None)
    p.add_argument("--threads", type=int, default=1)
    return p


def out_dir(args) -> Path:
    return Path(args.out) if args.out else ROOT / "results" / Path(args.config).stem


def show(summary: dict) -> None:
    print(json.dumps(summary, indent=2, default=float))
