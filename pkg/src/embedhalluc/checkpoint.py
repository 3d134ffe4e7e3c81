"""Checkpoint directories and CSV training logs.

A checkpoint directory holds ``manifest.txt`` (format version, config
echo, one line per array with its shape) and one ``.f64`` file per
array: the raw values, flat, little-endian float64.
"""

import csv
import json
import os

import numpy as np

from embedhalluc.errors import DataError

FORMAT_VERSION = 1


def _filename(name):
    return name.replace("/", "_") + ".f64"


def save_checkpoint(directory, arrays, config=None):
    """Write named float arrays plus a manifest into ``directory``."""
    os.makedirs(directory, exist_ok=True)
    lines = [f"format_version {FORMAT_VERSION}"]
    lines.append("config " + json.dumps(config if config is not None else {}))
    for name in sorted(arrays):
        arr = np.asarray(arrays[name], dtype=np.float64)
        shape = ",".join(str(s) for s in arr.shape) or "scalar"
        lines.append(f"array {name} {shape}")
        with open(os.path.join(directory, _filename(name)), "wb") as fh:
            fh.write(arr.astype("<f8").tobytes())
    with open(os.path.join(directory, "manifest.txt"), "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_checkpoint(directory):
    """Read a checkpoint directory; returns (arrays, config)."""
    manifest = os.path.join(directory, "manifest.txt")
    if not os.path.exists(manifest):
        raise DataError(f"{directory}: no manifest.txt")
    arrays, config = {}, {}
    with open(manifest, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            kind, _, rest = line.partition(" ")
            if kind == "format_version":
                if int(rest) != FORMAT_VERSION:
                    raise DataError(f"unsupported checkpoint format {rest}")
            elif kind == "config":
                config = json.loads(rest)
            elif kind == "array":
                name, _, shape_s = rest.rpartition(" ")
                shape = (
                    ()
                    if shape_s == "scalar"
                    else tuple(int(s) for s in shape_s.split(","))
                )
                path = os.path.join(directory, _filename(name))
                raw = np.fromfile(path, dtype="<f8")
                expected = int(np.prod(shape)) if shape else 1
                if raw.size != expected:
                    raise DataError(
                        f"{path}: has {raw.size} values, manifest says {expected}"
                    )
                arrays[name] = raw.reshape(shape).astype(np.float64)
            else:
                raise DataError(f"{manifest}: line {lineno}: unknown entry {kind!r}")
    return arrays, config


def write_csv(path, header, rows):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def write_gan_history(path, history):
    """history rows: (epoch, critic_loss, gen_loss, wasserstein_estimate)."""
    write_csv(
        path, ["epoch", "critic_loss", "gen_loss", "wasserstein_estimate"], history
    )


def write_step_log(path, log):
    """log rows: (step, L_real, L_halluc, val_metric-or-empty)."""
    write_csv(path, ["step", "L_real", "L_halluc", "val_metric"], log)


def read_csv(path):
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        return header, list(reader)
