"""Dome-on-circle contact cases: place the dome so it overlaps a circle by a chosen depth
with its axis tilted by a chosen roll, and record the sensor pose that results."""
import json
import math
import pathlib

RADIUS = 40.0
DOME = 12.0
CASES = [  # (angular position of contact on the circle deg, depth mm, roll deg)
    (0.0, 2.0, 10.0),
    (37.0, 2.0, 10.0),
    (200.0, 3.5, -22.0),
    (90.0, 0.0, 0.0),
]


def main():
    rows = []
    for phi, depth, roll in CASES:
        ux, uy = math.cos(math.radians(phi)), math.sin(math.radians(phi))
        dist = RADIUS + DOME - depth           # dome centre to circle centre
        cx, cy = dist * ux, dist * uy
        inward = math.atan2(-uy, -ux)
        heading = inward + math.radians(roll)  # counter-clockwise from inward normal
        tip = [cx + DOME * math.cos(heading), cy + DOME * math.sin(heading)]
        # Penetration of the tip point itself, for reference.
        tip_depth = RADIUS - math.hypot(*tip)
        rows.append({"tip": tip, "heading_deg": math.degrees(heading), "y_depth": depth, "theta_roll": roll,
                     "tip_depth": tip_depth})
    out = {"radius": RADIUS, "dome_radius": DOME, "cases": rows}
    path = pathlib.Path(__file__).resolve().parent.parent / "data" / "circle_contact.json"
    path.write_text(json.dumps(out, indent=1) + "\n")


if __name__ == "__main__":
    main()
