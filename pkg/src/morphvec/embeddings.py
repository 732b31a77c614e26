"""Embedding and coefficient file formats.

Text format: header line ``V D``, then one ``word v_1 ... v_D`` line per
word with 6 significant digits. Binary format: the same ASCII header line,
then per word the UTF-8 word bytes, a space, and D little-endian float32
values followed by a newline.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np


def write_embeddings_text(path: str | Path, words: list[str], M: np.ndarray) -> None:
    V, D = M.shape
    if len(words) != V:
        raise ValueError("word list and matrix disagree on vocabulary size")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{V} {D}\n")
        for w, row in zip(words, M):
            fh.write(w + " " + " ".join(f"{x:.6g}" for x in row) + "\n")


def read_embeddings_text(path: str | Path) -> tuple[list[str], np.ndarray]:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ValueError(f"{path}: malformed header")
        V, D = int(header[0]), int(header[1])
        words: list[str] = []
        M = np.empty((V, D))
        for i in range(V):
            parts = fh.readline().rstrip("\n").split(" ")
            if len(parts) != D + 1:
                raise ValueError(f"{path}: row {i} has {len(parts) - 1} values, wanted {D}")
            words.append(parts[0])
            M[i] = [float(x) for x in parts[1:]]
    return words, M


def write_embeddings_binary(path: str | Path, words: list[str], M: np.ndarray) -> None:
    V, D = M.shape
    if len(words) != V:
        raise ValueError("word list and matrix disagree on vocabulary size")
    with open(path, "wb") as fh:
        fh.write(f"{V} {D}\n".encode("utf-8"))
        for w, row in zip(words, M):
            fh.write(w.encode("utf-8") + b" ")
            fh.write(row.astype("<f4").tobytes())
            fh.write(b"\n")


def read_embeddings_binary(path: str | Path) -> tuple[list[str], np.ndarray]:
    with open(path, "rb") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ValueError(f"{path}: malformed header")
        V, D = int(header[0]), int(header[1])
        row_bytes = 4 * D
        words: list[str] = []
        M = np.empty((V, D), dtype=np.float64)
        for i in range(V):
            chars = bytearray()
            while True:
                ch = fh.read(1)
                if not ch:
                    raise ValueError(f"{path}: truncated at row {i}")
                if ch == b" ":
                    break
                if ch != b"\n":
                    chars.extend(ch)
            data = fh.read(row_bytes)
            if len(data) != row_bytes:
                raise ValueError(f"{path}: truncated vector at row {i}")
            words.append(chars.decode("utf-8"))
            M[i] = np.frombuffer(data, dtype="<f4")
    return words, M


def write_coefficients(path: str | Path, c1: np.ndarray, c2: np.ndarray) -> None:
    if len(c1) != len(c2):
        raise ValueError("c1 and c2 lengths differ")
    with open(path, "w", encoding="utf-8") as fh:
        for b, (a, z) in enumerate(zip(c1, c2)):
            fh.write(f"{b}\t{float(a)!r}\t{float(z)!r}\n")


def read_coefficients(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    c1: list[float] = []
    c2: list[float] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh):
            line = line.rstrip("\n")
            if not line:
                continue
            b, a, z = line.split("\t")
            if int(b) != len(c1):
                raise ValueError(f"{path}:{lineno + 1}: bucket ids out of order")
            c1.append(float(a))
            c2.append(float(z))
    return np.asarray(c1), np.asarray(c2)
