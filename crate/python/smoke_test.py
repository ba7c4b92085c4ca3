"""Smoke test for the macsort extension module.

Build first:  pip install --no-build-isolation -e crates/py
"""

import math
import os
import tempfile

import macsort


def close(a, b, tol=1e-9):
    return abs(a - b) <= tol


def main():
    assert close(macsort.iou((0, 0, 10, 10), (5, 0, 10, 10)), 50 / 150)
    assert close(macsort.cosine_similarity([1, 0], [1, 1]), 1 / math.sqrt(2))

    aaw, amc = macsort.adaptive_weights(math.cos(math.radians(45)), 45.0)
    assert close(aaw, 1.0) and aaw + amc == 2.0
    assert close(macsort.compute_mu_det([[1, 0], [2, 0], [5, 0]]), 1.0)

    matches, rows, cols = macsort.linear_assignment([[4, 1, 3], [2, 0, 5], [3, 2, 2]])
    assert matches == [(0, 1), (1, 0), (2, 2)] and not rows and not cols
    matches, rows, cols = macsort.linear_assignment([[1, math.inf], [math.inf, math.inf]])
    assert matches == [(0, 0)] and rows == [1] and cols == [1]

    assert macsort.parse_caption(
        "Track white headlight cars while excluding red taillight cars", "car"
    ) == ("cars", "white headlight", "red taillight")

    f = macsort.PromptFilter()
    out = f.process_frame(
        1,
        general=[((0, 0, 20, 20), [1, 0], 0.9), ((100, 0, 20, 20), [0, 1], 0.8)],
        include=[((1, 0, 20, 20), [1, 0], 0.6)],
        exclude=[((101, 0, 20, 20), [0, 1], 0.6)],
    )
    assert out["final"] == [0] and out["dropped"] == [1]
    assert f.memory_sizes() == (1, 1)

    spec = "seed=3\nn_objects=3\nn_frames=30\nappearance_homogeneity=0.2\n"
    scenario = macsort.generate_scenario(spec)
    tracker = macsort.Tracker()
    pred = []
    by_frame = {}
    for frame, box, conf, emb in scenario["detections"]:
        by_frame.setdefault(frame, []).append((box, conf, emb))
    for frame in range(1, 31):
        for tid, (l, t, w, h), _ in tracker.step(frame, by_frame.get(frame, [])):
            pred.append((frame, tid, l, t, w, h))
    assert tracker.num_tracks == 3
    assert len({row[1] for row in pred}) == 3

    report = macsort.evaluate(scenario["gt"], pred)
    assert report["id_switches"] == 0 and report["fp"] == 0
    assert close(report["hota"], math.sqrt(report["deta"] * report["assa"]))
    assert macsort.evaluate(scenario["gt"], scenario["gt"])["idf1"] == 1.0

    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "res.txt")
        macsort.write_mot([(1, 1, 100, 50, 20, 40, 0.9)], path)
        assert macsort.read_mot(path) == [(1, 1, 100.0, 50.0, 20.0, 40.0, 0.9)]
        macsort.write_scenario(spec, os.path.join(tmp, "seq"))
        assert os.path.exists(os.path.join(tmp, "seq", "gt.txt"))

    try:
        macsort.Tracker(theta_deg=0.0)
    except ValueError:
        pass
    else:
        raise AssertionError("invalid config accepted")

    print("python smoke test: ok")


if __name__ == "__main__":
    main()
