#!/usr/bin/env python3
"""Rewrite a stump-based cascade from OpenCV's current XML layout
(<cascade> with <weakClassifiers> and a shared <features> list) into the
legacy tree layout read by `facerec`.

    opencv_to_legacy_cascade.py haarcascade_frontalface_default.xml out.xml

The leading license comment of the input is carried over verbatim.
"""

import argparse
import re
import sys
import xml.etree.ElementTree as ET


def numbers(text):
    return text.split()


def convert(src_text):
    comment = re.match(r"\s*(<\?xml[^>]*\?>)?\s*(<!--.*?-->)?", src_text, re.S)
    header = comment.group(2) if comment and comment.group(2) else ""
    root = ET.fromstring(src_text)
    cascade = root.find("cascade")
    if cascade is None or cascade.findtext("featureType", "").strip() != "HAAR":
        raise SystemExit("input is not a HAAR <cascade> document")
    width = int(cascade.findtext("width"))
    height = int(cascade.findtext("height"))
    features = []
    for f in cascade.find("features"):
        rects = [" ".join(numbers(r.text)) for r in f.find("rects")]
        tilted = int((f.findtext("tilted") or "0").strip())
        features.append((rects, tilted))

    out = ['<?xml version="1.0"?>']
    if header:
        out.append(header)
    out.append("<opencv_storage>")
    out.append('<cascade type_id="opencv-haar-classifier">')
    out.append(f"  <size>{width} {height}</size>")
    out.append("  <stages>")
    for stage in cascade.find("stages"):
        out.append("    <_>")
        out.append("      <trees>")
        for weak in stage.find("weakClassifiers"):
            nodes = numbers(weak.findtext("internalNodes"))
            leaves = numbers(weak.findtext("leafValues"))
            if len(nodes) != 4 or len(leaves) != 2:
                raise SystemExit("only single-stump weak classifiers can be converted")
            rects, tilted = features[int(nodes[2])]
            out.append("        <_>")
            out.append("          <_>")
            out.append("            <feature>")
            out.append("              <rects>")
            for r in rects:
                out.append(f"                <_>{r}</_>")
            out.append("              </rects>")
            out.append(f"              <tilted>{tilted}</tilted></feature>")
            out.append(f"            <threshold>{nodes[3]}</threshold>")
            out.append(f"            <left_val>{leaves[0]}</left_val>")
            out.append(f"            <right_val>{leaves[1]}</right_val></_></_>")
        out.append("      </trees>")
        out.append(f"      <stage_threshold>{stage.findtext('stageThreshold').strip()}</stage_threshold>")
        out.append("      <parent>-1</parent>")
        out.append("      <next>-1</next></_>")
    out.append("  </stages></cascade>")
    out.append("</opencv_storage>")
    return "\n".join(out) + "\n"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("input")
    ap.add_argument("output", nargs="?", default="-")
    args = ap.parse_args()
    with open(args.input, encoding="utf-8") as f:
        text = convert(f.read())
    if args.output == "-":
        sys.stdout.write(text)
    else:
        with open(args.output, "w", encoding="utf-8") as f:
            f.write(text)


if __name__ == "__main__":
    main()
