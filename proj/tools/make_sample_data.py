#!/usr/bin/env python3
"""Regenerates data/sample: a 50-image synthetic lifelog stream with three
planted activities (breakfast / bike ride / desk work), the toy predictor
that captions them, word vectors for region-sentence alignment, ground-truth
sensitivity labels and reference sentences.

The stream plants three interior images (8, 25, 42) whose region vectors
lean toward a neighboring activity: with --beta 0 they break segments, and
any beta in roughly [1.5, 20] snaps the diary back to the three planted
segments.
"""

import json
import os

OUT = os.path.join(os.path.dirname(__file__), "..", "data", "sample")

VOCAB = ["<s>", "</s>", "i", "am", "eating", "breakfast", "riding", "a", "bike",
         "working", "at", "my", "desk", "computer", "now", "quietly"]

CENTROIDS = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]

# Shared sentence lexicon; the early-stop activation of -4 keeps captions
# from truncating mid-sentence. Clusters differ only in the verb they prefer
# after "am".
SHARED_ROWS = {
    "<s>": {"i": 4.0, "</s>": -4.0},
    "i": {"am": 4.0, "</s>": -4.0},
    "eating": {"breakfast": 4.0, "now": 2.5, "</s>": -4.0},
    "breakfast": {"</s>": 4.0, "now": 3.0, "quietly": 2.5},
    "riding": {"a": 4.0, "now": 2.5, "</s>": -4.0},
    "a": {"bike": 4.0, "</s>": -4.0},
    "bike": {"</s>": 4.0, "now": 3.0, "quietly": 2.5},
    "working": {"at": 4.0, "now": 2.5, "</s>": -4.0},
    "at": {"my": 4.0, "</s>": -4.0},
    "my": {"desk": 4.0, "computer": 3.0, "</s>": -4.0},
    "desk": {"</s>": 4.0, "now": 3.0, "quietly": 2.5},
    "computer": {"</s>": 4.0, "now": 2.5},
    "now": {"</s>": 4.0},
    "quietly": {"</s>": 4.0},
}

AM_ROWS = {
    0: {"eating": 4.0, "riding": 2.5, "working": 2.5, "</s>": -4.0},
    1: {"riding": 4.0, "eating": 2.5, "working": 2.5, "</s>": -4.0},
    2: {"working": 4.0, "eating": 2.5, "riding": 2.5, "</s>": -4.0},
}

BIGRAMS = {
    cluster: dict(SHARED_ROWS, am=AM_ROWS[cluster]) for cluster in (0, 1, 2)
}

# Five embedding axes: one per activity object, one for verbs ("someone is
# doing something"), one for first-person narration. The verb and narration
# regions below make full sentences strictly outscore their subject-dropped
# variants.
WORD_VECTORS = {
    "breakfast": [3.0, 0.0, 0.0, 0.0, 0.0],
    "eating": [2.0, 0.0, 0.0, 0.8, 0.0],
    "bike": [0.0, 3.0, 0.0, 0.0, 0.0],
    "riding": [0.0, 2.0, 0.0, 0.8, 0.0],
    "desk": [0.0, 0.0, 3.0, 0.0, 0.0],
    "computer": [0.0, 0.0, 2.5, 0.0, 0.0],
    "working": [0.0, 0.0, 2.0, 0.8, 0.0],
    "i": [0.0, 0.0, 0.0, 0.0, 0.6],
    "am": [0.0, 0.0, 0.0, 0.0, 0.5],
    "a": [0.1, 0.1, 0.1, 0.1, 0.1],
    "at": [0.1, 0.1, 0.1, 0.1, 0.1],
    "my": [0.1, 0.1, 0.1, 0.1, 0.1],
    "now": [0.1, 0.1, 0.1, 0.1, 0.1],
    "quietly": [0.1, 0.1, 0.1, 0.1, 0.1],
}

# Image index ranges per activity and the noisy interior images.
BLOCKS = [(0, 16, 0), (17, 33, 1), (34, 49, 2)]
NOISY = {8: 1, 25: 2, 42: 0}  # image index -> activity its regions lean toward

REFERENCES = {
    0: ["i am eating breakfast", "a bowl of cereal sits on the kitchen table"],
    1: ["i am riding a bike", "a bicycle rolls down the street"],
    2: ["i am working at my desk", "a person types at a desk with a computer"],
}


def axis(cluster, scale, dim=3):
    v = [0.0] * dim
    v[cluster] = scale
    return v


def add(a, b):
    return [x + y for x, y in zip(a, b)]


VERB_REGION = [0.0, 0.0, 0.0, 0.9, 0.0]
NARRATION_REGION = [0.0, 0.0, 0.0, 0.0, 0.5]


def main():
    os.makedirs(OUT, exist_ok=True)

    with open(os.path.join(OUT, "vocab.txt"), "w") as f:
        f.write("\n".join(VOCAB) + "\n")

    predictor = {
        "vocabulary": VOCAB,
        "centroids": CENTROIDS,
        "default_activation": 0.0,
        "bigrams": {
            str(cluster): {
                prev: [row.get(tok, 0.0) for tok in VOCAB]
                for prev, row in table.items()
            }
            for cluster, table in BIGRAMS.items()
        },
    }
    with open(os.path.join(OUT, "toy_predictor.json"), "w") as f:
        json.dump(predictor, f, indent=1)
        f.write("\n")

    with open(os.path.join(OUT, "word_vectors.txt"), "w") as f:
        for token, vec in WORD_VECTORS.items():
            f.write(token + " " + " ".join(str(v) for v in vec) + "\n")

    records = []
    for start, end, cluster in BLOCKS:
        for i in range(start, end + 1):
            feature = axis(cluster, 1.0)
            feature[(cluster + 1) % 3] = 0.05 * (i % 3)  # mild per-image texture
            if i in NOISY:
                r1 = add(axis(cluster, 0.2, 5), axis(NOISY[i], 1.2, 5))
            else:
                r1 = axis(cluster, 1.0 + 0.01 * (i % 4), 5)
            records.append({
                "image_id": "img%03d" % i,
                "timestamp": "2015-06-01T08:%02d:%02dZ" % (i // 2, 30 * (i % 2)),
                "feature": feature,
                "regions": [r1, VERB_REGION, NARRATION_REGION],
            })

    with open(os.path.join(OUT, "stream.jsonl"), "w") as f:
        f.write(json.dumps({"stream_id": "sample-day"}) + "\n")
        for rec in records:
            f.write(json.dumps(rec) + "\n")

    with open(os.path.join(OUT, "keywords.json"), "w") as f:
        json.dump({
            "place_keywords": ["toilet", "bathroom", "locker", "lavatory", "washroom"],
            "display_keywords": ["computer", "laptop", "iphone", "smartphone", "screen"],
            "captions_per_image": 5,
            "match_mode": "exact",
        }, f, indent=1)
        f.write("\n")

    with open(os.path.join(OUT, "labels.txt"), "w") as f:
        for start, end, cluster in BLOCKS:
            for i in range(start, end + 1):
                label = "display" if cluster == 2 else "not_sensitive"
                f.write("img%03d %s\n" % (i, label))

    with open(os.path.join(OUT, "references.jsonl"), "w") as f:
        for start, end, cluster in BLOCKS:
            for i in range(start, end + 1):
                f.write(json.dumps({
                    "image_id": "img%03d" % i,
                    "references": REFERENCES[cluster],
                }) + "\n")

    with open(os.path.join(OUT, "config.json"), "w") as f:
        json.dump({
            "vocabulary": "data/sample/vocab.txt",
            "predictor": "data/sample/toy_predictor.json",
            "word_vectors": "data/sample/word_vectors.txt",
            "decoder": {"beam_size": 5, "rounds": 3, "diversity_penalty": 2.0, "max_len": 12},
            "joint": {"beta": 2.0, "window": 0},
            "keywords": {
                "place_keywords": ["toilet", "bathroom", "locker", "lavatory", "washroom"],
                "display_keywords": ["computer", "laptop", "iphone", "smartphone", "screen"],
                "captions_per_image": 5,
                "match_mode": "exact",
            },
            "output_dir": "out",
        }, f, indent=1)
        f.write("\n")

    print("wrote %d records to %s" % (len(records), OUT))


if __name__ == "__main__":
    main()
