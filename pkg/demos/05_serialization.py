"""Round-trip a filter through its binary file and watch corruption get caught."""
import tempfile
from pathlib import Path

import numpy as np

from dsfilter import PointSet, build_pointwise
from dsfilter.filter import FormatError, deserialize, serialize

S = PointSet.random(16, 128, np.random.default_rng(5))
f = build_pointwise(S, 3, 2, 0.01, seed=11)
data = serialize(f)
print(f"{len(data)} bytes, {f.payload_bytes_per_point} per point, magic {data[:4]!r}")

path = Path(tempfile.mkdtemp()) / "filter.dsbf"
path.write_bytes(data)
g = deserialize(path.read_bytes())
print("round trip equal:", g == f, " same bytes:", serialize(g) == data)

# same seed and config, same bytes
print("rebuild identical:", serialize(build_pointwise(S, 3, 2, 0.01, seed=11)) == data)

for name, bad in [("flipped payload byte", data[:60] + bytes([data[60] ^ 1]) + data[61:]),
                  ("truncated", data[:-9]),
                  ("wrong magic", b"XXXX" + data[4:])]:
    try:
        deserialize(bad)
    except FormatError as exc:
        print(f"{name}: {type(exc).__name__} (code {exc.code}): {exc}")
