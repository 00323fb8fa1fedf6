"""Regenerate the golden bridge fixtures under tests/fixtures/.

Run explicitly (never from the test suite):

    python3 tools/update_fixtures.py

The fixtures freeze the exact conditional local-time pmfs of the lazy
walk at n = 2 and n = 4, which are also verified by brute-force path
enumeration in derive_constants.py (section walk). Changing them is a
behavioural change and should be treated like one.
"""

from __future__ import annotations

import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from renewlab.walk import WalkLaw, bridge_local_time_exact  # noqa: E402

FIXTURE_DIR = pathlib.Path(__file__).resolve().parents[1] / "tests" / "fixtures"


def main() -> None:
    FIXTURE_DIR.mkdir(parents=True, exist_ok=True)
    law = WalkLaw()
    for n in (2, 4):
        res = bridge_local_time_exact(law, n)
        path = FIXTURE_DIR / f"walk_bridge_n{n}.csv"
        lines = ["k,probability"]
        for k, p in enumerate(res.pmf):
            lines.append(f"{k},{float(p)!r}")
        path.write_text("\n".join(lines) + "\n")
        print(f"wrote {path} ({len(res.pmf)} rows, bridge mass {res.p_bridge!r})")


if __name__ == "__main__":
    main()
