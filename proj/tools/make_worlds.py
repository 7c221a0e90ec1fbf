#!/usr/bin/env python3
"""Regenerates the shipped world files in worlds/."""

import json
import pathlib

OUT = pathlib.Path(__file__).resolve().parent.parent / "worlds"

WALL_COLOR = [170, 170, 175]
CRATE_COLOR = [140, 100, 60]
TABLE_COLORS = [[200, 50, 45], [40, 90, 190], [215, 180, 40]]
TABLE_W, TABLE_D, TABLE_H = 1.2, 1.0, 0.8
WA_W, WA_D = 0.8, 1.0

# Side of each table (T = against the top wall, B = bottom), table min x, crate spots.
CORRIDORS = [
    ("TBT", [4.1, 9.6, 15.1], [(7.1, 5.3), (12.6, 0.2)]),
    ("BTB", [4.1, 9.6, 15.1], [(7.1, 0.2), (12.6, 5.3)]),
    ("TTB", [3.6, 8.6, 14.6], [(11.1, 0.2), (17.1, 5.3)]),
    ("BBT", [3.6, 8.6, 14.6], [(11.1, 5.3), (17.1, 0.2)]),
    ("TBB", [4.6, 10.1, 15.6], [(2.6, 5.3), (13.1, 5.3)]),
    ("BTT", [4.6, 10.1, 15.6], [(2.6, 0.2), (13.1, 0.2)]),
    ("TTT", [3.1, 9.1, 15.1], [(6.1, 0.2), (12.1, 0.2)]),
]


def rect(x0, y0, x1, y1):
    return {"min": [round(x0, 3), round(y0, 3)], "max": [round(x1, 3), round(y1, 3)]}


def box(x0, y0, x1, y1, height, color):
    r = rect(x0, y0, x1, y1)
    r["height"] = height
    r["color"] = color
    return r


def corridor(index, sides, xs, crates):
    obstacles = [
        box(0.0, 0.0, 22.0, 0.2, 1.5, WALL_COLOR),
        box(0.0, 5.8, 22.0, 6.0, 1.5, WALL_COLOR),
        box(0.0, 0.2, 0.2, 5.8, 1.5, WALL_COLOR),
        box(21.8, 0.2, 22.0, 5.8, 1.5, WALL_COLOR),
    ]
    areas = []
    for k, (side, x0) in enumerate(zip(sides, xs)):
        x1 = x0 + TABLE_W
        cx = 0.5 * (x0 + x1)
        if side == "T":
            obstacles.append(box(x0, 5.8 - TABLE_D, x1, 5.8, TABLE_H, TABLE_COLORS[k]))
            wa = rect(cx - WA_W / 2, 4.8 - WA_D, cx + WA_W / 2, 4.8)
        else:
            obstacles.append(box(x0, 0.2, x1, 0.2 + TABLE_D, TABLE_H, TABLE_COLORS[k]))
            wa = rect(cx - WA_W / 2, 1.2, cx + WA_W / 2, 1.2 + WA_D)
        wa.update({"dwell": 15.0, "approach": "forward"})
        areas.append(wa)
    for x0, y0 in crates:
        obstacles.append(box(x0, y0, x0 + 0.5, y0 + 0.5, 0.6, CRATE_COLOR))
    return {
        "schema_version": 1,
        "name": f"corridor_{index}",
        "bounds": rect(0.0, 0.0, 22.0, 6.0),
        "floor_color": [110, 110, 110],
        "obstacles": obstacles,
        "working_areas": areas,
        "goal": rect(19.8, 2.0, 21.6, 4.0),
        "start_pose": {"x": 1.2, "y": 1.5, "theta": 0.0, "footprint_radius": 0.25, "body_height": 1.2},
    }


def single_obstacle(name, theta, approach, goal):
    return {
        "schema_version": 1,
        "name": name,
        "bounds": rect(0.0, 0.0, 12.0, 6.0),
        "floor_color": [110, 110, 110],
        "obstacles": [box(0.9, 2.5, 1.9, 3.5, 0.8, TABLE_COLORS[0])],
        "working_areas": [dict(rect(1.9, 2.6, 2.9, 3.4), dwell=15.0, approach=approach)],
        "goal": goal,
        "start_pose": {"x": 4.2, "y": 3.0, "theta": theta, "footprint_radius": 0.25, "body_height": 1.2},
    }


def main():
    OUT.mkdir(exist_ok=True)
    worlds = [corridor(i + 1, *spec) for i, spec in enumerate(CORRIDORS)]
    worlds.append(single_obstacle("back_into_obstacle", 0.0, "reverse", rect(9.9, 2.1, 11.6, 3.9)))
    worlds.append(single_obstacle("approach_working_area", 3.141592653589793, "forward", rect(9.9, 2.1, 11.6, 3.9)))
    worlds.append({
        "schema_version": 1,
        "name": "open_field",
        "bounds": rect(0.0, 0.0, 12.0, 6.0),
        "floor_color": [110, 110, 110],
        "obstacles": [],
        "working_areas": [],
        "goal": rect(9.1, 2.1, 10.9, 3.9),
        "start_pose": {"x": 1.5, "y": 3.0, "theta": 0.0, "footprint_radius": 0.25, "body_height": 1.2},
    })
    for w in worlds:
        (OUT / f"{w['name']}.json").write_text(json.dumps(w, indent=2) + "\n")


if __name__ == "__main__":
    main()
