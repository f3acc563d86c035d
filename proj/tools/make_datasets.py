#!/usr/bin/env python3
# Copyright 2026 The DAC Authors.
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Regenerates the bundled classification datasets in data/.

monk1 and monk3 enumerate the full MONK's problems attribute space (432
rows) and label it with the published target concepts; monk3 flips 5% of
labels with a fixed seed. tic-tac-toe lists every distinct endgame board
reachable from the empty board (958 rows), labelled 1 when x has won.
"""

import csv
import itertools
import pathlib
import random

OUT = pathlib.Path(__file__).resolve().parent.parent / "data"
MONK_DOMAINS = [(1, 2, 3), (1, 2, 3), (1, 2), (1, 2, 3), (1, 2, 3, 4), (1, 2)]
MONK_NAMES = ["a1", "a2", "a3", "a4", "a5", "a6"]


def monk_rows():
    return list(itertools.product(*MONK_DOMAINS))


def write(name, header, rows):
    OUT.mkdir(exist_ok=True)
    with open(OUT / name, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def monk1():
    rows = [(*a, int(a[0] == a[1] or a[4] == 1)) for a in monk_rows()]
    write("monk1.csv", MONK_NAMES + ["class"], rows)


def monk3():
    rows = [(*a, int((a[4] == 3 and a[3] == 1) or (a[4] != 4 and a[1] != 3)))
            for a in monk_rows()]
    rng = random.Random(3)
    for i in rng.sample(range(len(rows)), round(0.05 * len(rows))):
        rows[i] = (*rows[i][:-1], 1 - rows[i][-1])
    write("monk3.csv", MONK_NAMES + ["class"], rows)


LINES = [(0, 1, 2), (3, 4, 5), (6, 7, 8), (0, 3, 6), (1, 4, 7), (2, 5, 8),
         (0, 4, 8), (2, 4, 6)]


def winner(board):
    for a, b, c in LINES:
        if board[a] != "b" and board[a] == board[b] == board[c]:
            return board[a]
    return None


def tic_tac_toe():
    endgames = set()

    def play(board, mover):
        if winner(board) or "b" not in board:
            endgames.add(tuple(board))
            return
        for i in range(9):
            if board[i] == "b":
                board[i] = mover
                play(board, "o" if mover == "x" else "x")
                board[i] = "b"

    play(["b"] * 9, "x")
    code = {"b": 0, "x": 1, "o": 2}
    rows = [[code[s] for s in board] + [int(winner(board) == "x")]
            for board in sorted(endgames)]
    names = ["top_left", "top_middle", "top_right", "middle_left", "middle_middle",
             "middle_right", "bottom_left", "bottom_middle", "bottom_right"]
    write("tic-tac-toe.csv", names + ["class"], rows)


if __name__ == "__main__":
    monk1()
    monk3()
    tic_tac_toe()
