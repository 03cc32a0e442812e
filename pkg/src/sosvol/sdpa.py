"""SDPA sparse (``.dat-s``) export and import.

SDPA reads ``minimize c^T x  s.t.  sum_i F_i x_i - F_0  PSD``.  Our problems are
``maximize b^T y  s.t.  C - sum_j y_j A_j  PSD``, so on the way out we write
``c = -b``, ``F_0 = -C`` and ``F_j = -A_j``; reading applies the inverse map.
Indices are 1-based, only the upper triangle is written, and diagonal blocks
carry a negative size in the block structure line.
"""
from __future__ import annotations

import re
from pathlib import Path

import numpy as np

from .sdp import SdpProblem


def _fmt(v: float) -> str:
    return repr(float(v))


def write_sdpa(problem: SdpProblem, path, comment: str = "") -> None:
    lines = []
    for c in comment.splitlines() or [""]:
        lines.append('"' + c)
    lines.append(str(problem.m))
    lines.append(str(len(problem.blocks)))
    lines.append(" ".join(str(int(s)) for s in problem.blocks))
    lines.append(" ".join(_fmt(-v) for v in problem.b))

    def entries(mat_no: int, blk: int, mat: np.ndarray):
        if mat.ndim == 1:
            for i in np.flatnonzero(mat):
                yield f"{mat_no} {blk} {i + 1} {i + 1} {_fmt(-mat[i])}"
            return
        rows, cols = np.nonzero(np.triu(mat))
        for i, j in zip(rows, cols):
            yield f"{mat_no} {blk} {i + 1} {j + 1} {_fmt(-mat[i, j])}"

    for k, c in enumerate(problem.C):
        lines.extend(entries(0, k + 1, c))
    for j in range(problem.m):
        for k, a in enumerate(problem.A):
            lines.extend(entries(j + 1, k + 1, a[j]))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_sdpa(path) -> SdpProblem:
    text = Path(path).read_text(encoding="utf-8")
    body = [ln for ln in text.splitlines() if ln.strip() and ln.lstrip()[0] not in '"*']
    clean = [re.sub(r"[{},()]", " ", ln).split() for ln in body]
    m = int(clean[0][0])
    nblocks = int(clean[1][0])
    blocks = [int(v) for v in clean[2][:nblocks]]
    # the objective vector may wrap over several lines
    cvec: list[float] = []
    row = 3
    while len(cvec) < m:
        cvec.extend(float(v) for v in clean[row])
        row += 1
    C = [np.zeros(abs(s)) if s < 0 else np.zeros((s, s)) for s in blocks]
    A = [np.zeros((m, abs(s))) if s < 0 else np.zeros((m, s, s)) for s in blocks]
    for toks in clean[row:]:
        mat_no, blk, i, j = (int(t) for t in toks[:4])
        v = -float(toks[4])
        k = blk - 1
        target = C[k] if mat_no == 0 else A[k][mat_no - 1]
        if blocks[k] < 0:
            target[i - 1] = v
        else:
            target[i - 1, j - 1] = v
            target[j - 1, i - 1] = v
    return SdpProblem(blocks, -np.asarray(cvec[:m]), C, A)
