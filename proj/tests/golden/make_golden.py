#!/usr/bin/env python3
"""Writes windows.json and the expected prompt files window_NN.txt.

Independent of the C++ code: the prompt rules are re-implemented here.
"""
import json
import random

ORDINALS = ["Firstly", "Secondly", "Thirdly", "Fourthly", "Fifthly",
            "Sixthly", "Seventhly", "Eighthly", "Ninthly", "Tenthly"]


def ordinal(o):
    return ORDINALS[o - 1] if o <= 10 else f"{o}thly"


def runs(labels):
    out = []
    for i, c in enumerate(labels):
        if out and out[-1][0] == c:
            out[-1][2] = i + 1
        else:
            out.append([c, i, i + 1])
    return out


def render(labels, names):
    lines = []
    for o, (c, a, b) in enumerate(runs(labels), start=1):
        for i in range(a, b):
            slots = " ".join(f"<slot{s}>" for s in range(8))
            name = names[c].replace(" ", "_")
            lines.append(f"{ordinal(o)}, this action lasted {b - a} frames in current window, "
                         f"this is frame {i - a + 1} of the action, {slots} {name}")
    return lines


def main():
    rng = random.Random(20240611)
    gtea = ["background", "take", "open", "pour", "close", "shake", "scoop", "stir", "put", "fold", "spread"]
    windows = [
        {"class_names": ["A", "B"], "labels": [0, 0, 1]},
        {"class_names": ["A", "B"], "labels": [1]},
        {"class_names": ["background", "pour"], "labels": [0] * 32},
        {"class_names": ["background", "cut", "mix"], "labels": [0, 1, 2, 1, 0, 1, 2, 0]},
        {"class_names": ["x", "y"], "labels": [0, 1] * 7},
        {"class_names": ["background", "take bowl", "pour milk"], "labels": [1] * 5 + [2] * 12 + [0] * 3},
        {"class_names": gtea, "labels": list(range(11)) + list(range(10, -1, -1))},
    ]
    while len(windows) < 20:
        k = rng.choice([8, 16, 32, 32])
        n_cls = rng.randint(2, len(gtea))
        labels = []
        while len(labels) < k:
            labels += [rng.randrange(n_cls)] * rng.randint(1, 12)
        windows.append({"class_names": gtea[:n_cls], "labels": labels[:k]})

    with open("windows.json", "w") as f:
        json.dump(windows, f, indent=1)
        f.write("\n")
    for i, w in enumerate(windows):
        with open(f"window_{i:02d}.txt", "w") as f:
            f.write("\n".join(render(w["labels"], w["class_names"])) + "\n")


if __name__ == "__main__":
    main()
