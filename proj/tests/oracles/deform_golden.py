"""Golden frame for a Round331 tap at y = 4 mm, roll = 15 deg, written from the
displacement formula directly (no shared code with the C++ build)."""
import json
import math
import pathlib

PITCH = 1.0
RINGS = 10
RADIAL_DISTORTION = 0.05
PARAMS = {
    "dome_radius": 12.0,
    "push_gain": 0.12,
    "contact_sigma": 3.0,
    "roll_offset_gain": 10.0,
    "noise_std": 0.0,
    "compliance_gain": 1.0,
    "core_radius": 1.0,
}
Y_DEPTH, THETA = 4.0, 15.0


def round_layout():
    pts = [(0.0, 0.0)]
    for i in range(1, RINGS + 1):
        n = 6 * i
        pts += [(i * PITCH * math.cos(2 * math.pi * k / n), i * PITCH * math.sin(2 * math.pi * k / n)) for k in range(n)]
    r_max = max(math.hypot(x, y) for x, y in pts)
    out = []
    for x, y in pts:
        s = 1 + RADIAL_DISTORTION * (math.hypot(x, y) / r_max) ** 2
        out.append((x * s, y * s))
    return out


def main():
    p = PARAMS
    cx = p["roll_offset_gain"] * math.radians(THETA)
    d = max(0.0, Y_DEPTH) * p["compliance_gain"]
    moved = []
    for x, y in round_layout():
        rx, ry = x - cx, y
        r = math.hypot(rx, ry)
        g = math.exp(-r * r / (2 * p["contact_sigma"] ** 2))
        f = p["push_gain"] * d * g / max(r, p["core_radius"])
        moved.append([x + f * rx, y + f * ry])
    out = {"layout": "round331", "pitch": PITCH, "radial_distortion": RADIAL_DISTORTION, "params": p,
           "pose": {"y_depth": Y_DEPTH, "theta_roll": THETA}, "positions": moved}
    path = pathlib.Path(__file__).resolve().parent.parent / "data" / "deform_round331_y4_t15.json"
    path.write_text(json.dumps(out, indent=1) + "\n")


if __name__ == "__main__":
    main()
