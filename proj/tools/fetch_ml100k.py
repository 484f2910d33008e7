#!/usr/bin/env python3
"""Place ml-100k.inter under data/ml-100k/.

The atomic file ships inside the recbole wheel, so the wheel is downloaded
with pip (no dependencies) and the one member is extracted.
"""

import argparse
import pathlib
import subprocess
import sys
import tempfile
import zipfile

MEMBER = "recbole/dataset_example/ml-100k/ml-100k.inter"


def main() -> int:
    root = pathlib.Path(__file__).resolve().parent.parent
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--dest", type=pathlib.Path, default=root / "data" / "ml-100k")
    args = parser.parse_args()

    target = args.dest / "ml-100k.inter"
    if target.exists():
        print(f"already present: {target}")
        return 0

    with tempfile.TemporaryDirectory() as tmp:
        subprocess.run(
            [sys.executable, "-m", "pip", "download", "recbole", "--no-deps", "-d", tmp],
            check=True,
        )
        wheels = sorted(pathlib.Path(tmp).glob("recbole-*.whl"))
        if not wheels:
            print("pip did not produce a recbole wheel", file=sys.stderr)
            return 1
        with zipfile.ZipFile(wheels[-1]) as wheel:
            args.dest.mkdir(parents=True, exist_ok=True)
            target.write_bytes(wheel.read(MEMBER))
    print(f"wrote {target}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
