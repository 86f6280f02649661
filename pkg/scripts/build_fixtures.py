"""Regenerate the JSON inputs shipped in src/kuranishi/data.

    python scripts/build_fixtures.py [--out DIR]
"""
import argparse
from pathlib import Path

from kuranishi import fixtures as fx
from kuranishi.atlas import single_chart_atlas
from kuranishi.schemas import dumps
from kuranishi.tangent import canonical_inclusion

DEFAULT_OUT = Path(__file__).resolve().parents[1] / "src" / "kuranishi" / "data"


def morphism_file(target, h):
    return {"target": target.to_dict(), "morphism": h.to_dict()}


def mapped(chart, g):
    return {"chart": chart.to_dict(), "map": g.to_dict()}


def build():
    files = {}
    # presentations
    files["p235.json"] = fx.p235().to_dict()
    files["p237.json"] = fx.p237().to_dict()
    files["trivial_group.json"] = fx.trivial_group().to_dict()
    files["free_group.json"] = fx.free_group(2).to_dict()
    files["commutator.json"] = fx.commutator_group().to_dict()

    # atlases and morphisms
    atlas = fx.two_chart_atlas()
    files["two_chart_atlas.json"] = atlas.to_dict()
    h, target = fx.projection_to_line(atlas)
    files["projection_morphism.json"] = morphism_file(target, h)
    atlas3 = fx.three_chart_atlas()
    files["three_chart_atlas.json"] = atlas3.to_dict()
    h, target = fx.projection_to_line(atlas3)
    files["three_chart_morphism.json"] = morphism_file(target, h)
    files["disjoint_atlas.json"] = fx.disjoint_atlas().to_dict()
    files["overlapping_atlas.json"] = fx.overlapping_atlas().to_dict()
    h, A, T = fx.folded_embedding()
    files["folded_atlas.json"] = A.to_dict()
    files["folded_morphism.json"] = morphism_file(T, h)
    h, A, T = fx.rank_jump_embedding()
    files["rank_jump_atlas.json"] = A.to_dict()
    files["rank_jump_morphism.json"] = morphism_file(T, h)
    chart = fx.line_chart("x**2 - 1", footprint=[("P-", (-1.0,)), ("P+", (1.0,))], id="C")
    A, T, h = canonical_inclusion(chart)
    files["inclusion_atlas.json"] = A.to_dict()
    files["inclusion_morphism.json"] = morphism_file(T, h)

    # counting charts
    files["chart_x.json"] = fx.count_chart("x").to_dict()
    files["chart_x2.json"] = fx.count_chart("x**2").to_dict()
    files["chart_x3_minus_x.json"] = fx.count_chart("x**3 - x").to_dict()
    files["chart_2d.json"] = fx.count_chart(["x**2 - y", "y - 1"], ("x", "y"), radius=3.0).to_dict()
    files["single_chart_atlas.json"] = single_chart_atlas(fx.count_chart("x")).to_dict()

    # families
    files["family_fold.json"] = fx.family("x**2 - (2*t - 1)").to_dict()
    files["family_shift.json"] = fx.family("x - t").to_dict()
    files["family_escape.json"] = fx.family("x - 3*t", id="escape").to_dict()

    # mapped curves in the plane
    files["curve_x_axis.json"] = mapped(*fx.curve(["t", "0*t"], "Xaxis"))
    files["curve_diagonal.json"] = mapped(*fx.curve(["t", "t"], "Diag"))
    files["curve_parabola.json"] = mapped(*fx.curve(["t", "t**2 - 1"], "Parab"))
    files["curve_line_y1.json"] = mapped(*fx.curve(["t", "1 + 0*t"], "Y1"))
    return files


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=DEFAULT_OUT)
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    for name, obj in sorted(build().items()):
        (args.out / name).write_text(dumps(obj))
        print(f"wrote {args.out / name}")


if __name__ == "__main__":
    main()
