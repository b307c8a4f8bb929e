"""Reading and writing MAT 5 files without MATLAB.

Bench instruments and the public bearing datasets ship recordings as .mat
files.  The built-in reader handles the numeric subset (double, single,
int16, int32; plain or zlib-compressed), and the writer produces files
byte-identical across runs — handy for fixtures and regression baselines.
This script round-trips a file, verifies scipy agrees, and shows the
format errors on deliberately broken input.
"""

import tempfile
from pathlib import Path

import numpy as np
from scipy.io import loadmat

from tdafault.matio import MatFormatError, parse_mat, read_mat, write_mat

workdir = Path(tempfile.mkdtemp(prefix="matdemo_"))
path = workdir / "bench.mat"

arrays = {
    "DE_time": np.sin(np.arange(2000) / 7.0) + 0.01 * np.arange(2000),
    "RPM": np.array([[1772.0]]),
    "flags": np.array([[1, 0, 1]], dtype=np.int16),
}
write_mat(path, arrays, compress=True)
print(f"wrote {path.stat().st_size} bytes (compressed) to {path}")

back = read_mat(path)
for name, arr in back.items():
    print(f"  {name}: {arr.matlab_class} {arr.data.shape}")
de = back["DE_time"].data.ravel()
print(f"round-trip exact: {np.array_equal(de, arrays['DE_time'])}")

ref = loadmat(path)
print(f"scipy.io.loadmat agrees: {np.array_equal(ref['DE_time'].ravel(), de)}")

print("\nbroken inputs fail with a byte offset, not a stack trace:")
for label, buf in [
    ("truncated header", path.read_bytes()[:40]),
    ("flipped endian marker", path.read_bytes()[:126] + b"MI" + path.read_bytes()[128:]),
    ("chopped element", path.read_bytes()[:140]),
]:
    try:
        parse_mat(buf)
    except MatFormatError as exc:
        print(f"  {label:<24} -> {exc}")
