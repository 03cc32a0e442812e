"""
The sosvol command
==================

Everything above is reachable from the shell.  Problem files are JSON; see
fixtures/ for the interval and disk used throughout.  Here the commands are
driven in-process.
"""

# %%
import tempfile
from pathlib import Path

from sosvol.cli import main

fixtures = Path(__file__).resolve().parents[1] / "fixtures"
out = Path(tempfile.mkdtemp())

main(["volume", str(fixtures / "interval.json"), "--dmax", "12", "--out", str(out)])
print((out / "hierarchy.csv").read_text())

# %%
main(["rate", str(out / "hierarchy.csv"), "--vol-ref", "1"])
main(["bound", "--epsilon", "2"])
main(["oracle", str(fixtures / "disk.json"), "--samples", "200000"])
