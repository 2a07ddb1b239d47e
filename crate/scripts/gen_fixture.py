"""Generate the synthetic face-act corpus used by the acceptance tests.

296 conversations, 10,716 labeled turns, folds 0-4, with the published label
histogram. A few conversations are also copied into a second fold so fold
deduplication has work to do. Dialog-act tags and vocabulary are correlated
with the face-act label so a bag-of-words model can beat the majority class.
"""

import json
import random
import sys
from pathlib import Path

SEED = 20230517
HISTOGRAM = {
    "other": 4300,
    "hpos+": 2844,
    "spos+": 1589,
    "hneg-": 1073,
    "hpos-": 334,
    "hneg+": 305,
    "sneg+": 259,
    "spos-": 12,
    "sneg-": 0,
}
CONVERSATIONS = 296
FOLDS = 5
DUPLICATED = 4

CUES = {
    "other": "okay weather today kids weekend work morning fine evening family",
    "hpos+": "great thanks appreciate wonderful kind agree awesome glad generous amazing",
    "spos+": "charity children helped organization donations difference save lives proud volunteer",
    "hneg-": "would could donate consider please willing how much give maybe",
    "hpos-": "wrong doubt scam skeptical untrustworthy suspicious overhead waste disagree fake",
    "hneg+": "sorry pressure understand decide busy later want choose rather free",
    "sneg+": "afford money budget tight bills broke cannot unable rent paycheck",
    "spos-": "mistake fault apologize oops forgot confused misread bad wrongly blame",
}
FILLER = "the a i you it is to and that we this of for in so just really".split()

# Dialog-act distribution per label: (tag, weight).
TAGS = {
    "other": [("Statement", 6), ("BackChannel", 2), ("Question", 1), ("Disruption", 1)],
    "hpos+": [("Statement", 7), ("BackChannel", 2), ("FloorGrabber", 1)],
    "spos+": [("Statement", 9), ("Disruption", 1)],
    "hneg-": [("Question", 7), ("Statement", 3)],
    "hpos-": [("Statement", 6), ("Question", 3), ("Disruption", 1)],
    "hneg+": [("Statement", 8), ("Question", 1), ("FloorGrabber", 1)],
    "sneg+": [("Statement", 9), ("Disruption", 1)],
    "spos-": [("Statement", 8), ("BackChannel", 2)],
}


def utterance_text(rng, label):
    cues = CUES[label].split()
    words = [rng.choice(cues) for _ in range(rng.randint(1, 3))]
    # Cross-label noise keeps the task from being trivial.
    for _ in range(rng.randint(0, 2)):
        words.append(rng.choice(CUES[rng.choice(list(CUES))].split()))
    words += [rng.choice(FILLER) for _ in range(rng.randint(4, 8))]
    rng.shuffle(words)
    return " ".join(words).capitalize() + rng.choice([".", ".", "?", "!"])


def dialog_act(rng, label):
    tags, weights = zip(*TAGS[label])
    return rng.choices(tags, weights)[0]


def main(out_dir):
    rng = random.Random(SEED)
    labels = [label for label, n in HISTOGRAM.items() for _ in range(n)]
    rng.shuffle(labels)
    total = len(labels)
    base, extra = divmod(total, CONVERSATIONS)
    lengths = [base + (1 if i < extra else 0) for i in range(CONVERSATIONS)]
    rng.shuffle(lengths)

    records = []
    conversations = []
    start = 0
    for index, length in enumerate(lengths):
        conv_id = f"conv-{index:04d}"
        fold = index % FOLDS
        turns = []
        for turn, label in enumerate(labels[start : start + length]):
            turns.append(
                {
                    "conversation_id": conv_id,
                    "turn": turn,
                    "speaker": "ER" if turn % 2 == 0 else "EE",
                    "text": utterance_text(rng, label),
                    "face_act": label,
                    "dialog_act": dialog_act(rng, label),
                    "fold": fold,
                }
            )
        start += length
        conversations.append((conv_id, fold, turns))
        records.extend(turns)

    # Copies of a few conversations in a later fold; dedup keeps the original.
    candidates = [c for c in conversations if c[1] < FOLDS - 1]
    for conv_id, fold, turns in rng.sample(candidates, DUPLICATED):
        later = rng.randrange(fold + 1, FOLDS)
        records.extend(dict(t, fold=later) for t in turns)

    out = Path(out_dir)
    with open(out / "synthetic_faceact.jsonl", "w") as f:
        for record in records:
            f.write(json.dumps(record, separators=(",", ":")) + "\n")

    # Small dialog-act-only corpus for multi-task mixing.
    with open(out / "synthetic_da.jsonl", "w") as f:
        for index in range(40):
            for turn in range(rng.randint(6, 14)):
                label = rng.choice(list(CUES))
                record = {
                    "conversation_id": f"da-{index:03d}",
                    "turn": turn,
                    "speaker": "ER" if turn % 2 == 0 else "EE",
                    "text": utterance_text(rng, label),
                    "face_act": None,
                    "dialog_act": dialog_act(rng, label),
                    "fold": None,
                }
                f.write(json.dumps(record, separators=(",", ":")) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "crates/cli/tests/fixtures")
