#!/usr/bin/env python3
"""Convert RefCOCO-style annotations into refcam dataset lines.

Field mapping
    refs[i]["ref_id"], sentence["sent_id"]  -> sample_id "<ref_id>-<sent_id>"
    refs[i]["image_id"]                     -> image.id, image width/height from instances.json
    sentence["sent"]                        -> expression
    refs[i]["ann_id"] segmentation          -> gt (uncompressed RLE, row-major counts)
    refs[i]["split"]                        -> split_tags

Proposals come from a mask proposal network that this script does not run. With
--instance-proposals every COCO instance on the image becomes one proposal, which is
useful for checking the selection stage in isolation.

Needs pycocotools for polygon rasterisation.
"""

import argparse
import json
import pickle
from pathlib import Path


def to_row_major_rle(mask):
    flat = mask.reshape(-1)
    counts, current, run = [], 0, 0
    for v in flat:
        if int(v) != current:
            counts.append(run)
            current, run = int(v), 0
        run += 1
    counts.append(run)
    return {"size": [int(mask.shape[0]), int(mask.shape[1])], "counts": counts}


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--refs", required=True, help="refs(<split_by>).p pickle")
    ap.add_argument("--instances", required=True, help="instances.json")
    ap.add_argument("--split", default="val")
    ap.add_argument("--out", required=True, help="output directory")
    ap.add_argument("--instance-proposals", action="store_true")
    args = ap.parse_args()

    from pycocotools.coco import COCO

    coco = COCO(args.instances)
    with open(args.refs, "rb") as f:
        refs = [r for r in pickle.load(f) if r["split"] == args.split]

    out = Path(args.out)
    (out / "proposals").mkdir(parents=True, exist_ok=True)
    written = set()
    with open(out / "dataset.jsonl", "w") as lines:
        for ref in refs:
            info = coco.imgs[ref["image_id"]]
            proposals = f"proposals/{ref['image_id']}.json"
            if args.instance_proposals and ref["image_id"] not in written:
                anns = coco.loadAnns(coco.getAnnIds(imgIds=ref["image_id"]))
                entries = [{"id": a["id"], "rle": to_row_major_rle(coco.annToMask(a))} for a in anns]
                (out / proposals).write_text(json.dumps(entries))
                written.add(ref["image_id"])
            gt = to_row_major_rle(coco.annToMask(coco.anns[ref["ann_id"]]))
            for sent in ref["sentences"]:
                record = {
                    "sample_id": f"{ref['ref_id']}-{sent['sent_id']}",
                    "image": {"id": str(ref["image_id"]), "width": info["width"], "height": info["height"],
                              "path": info["file_name"]},
                    "expression": sent["sent"],
                    "proposals": proposals,
                    "gt": gt,
                    "split_tags": [ref["split"]],
                }
                lines.write(json.dumps(record) + "\n")


if __name__ == "__main__":
    main()
