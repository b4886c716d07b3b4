"""Expose a config dataclass's scalar fields as command-line flags."""
import argparse
from dataclasses import fields, replace


def parse_into(cfg, description: str):
    ap = argparse.ArgumentParser(description=description)
    for f in fields(cfg):
        v = getattr(cfg, f.name)
        if isinstance(v, tuple):
            ap.add_argument(f"--{f.name}", type=int, nargs="+", default=list(v))
        else:
            ap.add_argument(f"--{f.name}", type=type(v), default=v)
    args = vars(ap.parse_args())
    return replace(cfg, **{k: tuple(v) if isinstance(v, list) else v for k, v in args.items()})
