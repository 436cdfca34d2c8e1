#!/usr/bin/env python3
"""Regenerates the small bundled assets under data/ and config/.

The word-vector table is synthetic: each emotion owns a random direction in
R^8, emotion words sit near it, and function words share one common
direction (the one SIF common-component removal is meant to strip).
"""
import json
import pathlib

import numpy as np

ROOT = pathlib.Path(__file__).resolve().parents[1]
DIM = 8
rng = np.random.default_rng(20210419)

EMOTION_WORDS = {
    "joyful": ["happy", "joy", "smile", "glad", "fun", "laugh", "great", "wonderful", "cheerful", "delighted"],
    "sad": ["sad", "cry", "tears", "sorry", "upset", "miss", "loss", "heartbroken", "unhappy", "grief"],
    "angry": ["angry", "mad", "furious", "annoyed", "rage", "hate", "unfair", "yell", "frustrated", "irritated"],
    "afraid": ["afraid", "scared", "fear", "terrified", "scary", "horror", "ghost", "dark", "panic", "creepy"],
    "surprised": ["surprised", "wow", "shock", "unexpected", "amazed", "sudden", "astonished", "believe", "omg", "whoa"],
    "disgusted": ["disgusting", "gross", "nasty", "sick", "smell", "dirty", "yuck", "rotten", "vomit", "awful"],
    "anxious": ["anxious", "worried", "stress", "nervous", "exam", "interview", "tense", "uneasy", "deadline", "worry"],
    "proud": ["proud", "achievement", "won", "award", "promotion", "accomplished", "success", "graduated", "win", "earned"],
    "grateful": ["grateful", "thanks", "thank", "thankful", "appreciate", "kind", "gift", "helped", "blessed", "generous"],
    "lonely": ["lonely", "alone", "isolated", "nobody", "empty", "abandoned", "solitude", "quiet", "distant", "left"],
}

# Emoji description words, placed between the emotions they evoke.
DESCRIPTORS = {
    "face": {}, "heart": {"grateful": 0.6, "joyful": 0.4}, "tear": {"sad": 1.0},
    "eyes": {"surprised": 0.5}, "mouth": {"surprised": 0.5, "disgusted": 0.3},
    "sweat": {"anxious": 0.8, "afraid": 0.2}, "steam": {"angry": 1.0}, "fist": {"angry": 0.5, "proud": 0.5},
    "trophy": {"proud": 1.0}, "medal": {"proud": 0.9}, "party": {"joyful": 0.7, "proud": 0.3},
    "hug": {"grateful": 0.5, "lonely": 0.3, "joyful": 0.2}, "hands": {"grateful": 0.7},
    "scream": {"afraid": 0.8, "surprised": 0.2}, "nausea": {"disgusted": 1.0}, "grin": {"joyful": 1.0},
    "frown": {"sad": 0.6, "lonely": 0.4}, "ghostly": {"afraid": 0.7, "lonely": 0.3},
    "star": {"surprised": 0.5, "joyful": 0.5}, "flushed": {"surprised": 0.6, "anxious": 0.4},
    "pensive": {"lonely": 0.6, "sad": 0.4}, "pray": {"grateful": 0.8, "anxious": 0.2},
}

COMMON = """i you the a to and it was my that is so me of in for what we be have did not do on at
this with are but just really oh how know about when feel felt day time week work home friend
family today yesterday last got get all very too hope sure good bad him her he she they them
your our out up new old one two back after before night morning school job car dog house mom
dad brother sister boss team game party trip food movie news letter phone call told said went
made found lost saw heard still never always maybe well yes no can will would could should been
being had has there here then than now""".split()


def unit(v):
    return v / np.linalg.norm(v)


def build_vectors():
    common_dir = unit(rng.normal(size=DIM))
    emo_dir = {}
    for emotion in EMOTION_WORDS:
        d = rng.normal(size=DIM)
        d -= 0.7 * d.dot(common_dir) * common_dir
        emo_dir[emotion] = unit(d)
    table = {}
    for emotion, words in EMOTION_WORDS.items():
        for w in words:
            table[w] = emo_dir[emotion] + 0.25 * rng.normal(size=DIM) + 0.3 * common_dir
    for w, mix in DESCRIPTORS.items():
        v = 0.2 * rng.normal(size=DIM) + 0.3 * common_dir
        for emotion, weight in mix.items():
            v += weight * emo_dir[emotion]
        table[w] = v
    for w in COMMON:
        if w in table:
            continue
        table[w] = 0.6 * common_dir + 0.3 * rng.normal(size=DIM)
    return table


EMOJI_MAP = {
    "joyful": [("😀", ["grin", "face", "happy"]), ("😂", ["laugh", "tear", "joy"]), ("😊", ["smile", "face", "glad"]),
               ("🥳", ["party", "fun", "cheerful"])],
    "sad": [("😢", ["cry", "tear", "face"]), ("😭", ["cry", "tears", "grief"]), ("😞", ["unhappy", "frown", "face"])],
    "angry": [("😠", ["angry", "face"]), ("😡", ["rage", "furious", "face"]), ("😤", ["steam", "frustrated"])],
    "afraid": [("😨", ["fear", "scared", "face"]), ("😱", ["scream", "terrified", "horror"]), ("👻", ["ghost", "ghostly", "scary"])],
    "surprised": [("😮", ["mouth", "surprised", "wow"]), ("😲", ["astonished", "amazed", "face"]), ("🤩", ["star", "eyes", "amazed"])],
    "disgusted": [("🤢", ["nausea", "sick", "gross"]), ("🤮", ["vomit", "disgusting"]), ("😖", ["yuck", "awful", "face"])],
    "anxious": [("😰", ["anxious", "sweat", "face"]), ("😬", ["tense", "nervous"]), ("😳", ["flushed", "uneasy"])],
    "proud": [("🏆", ["trophy", "win", "award"]), ("🥇", ["medal", "won", "success"]), ("💪", ["fist", "accomplished", "proud"])],
    "grateful": [("🙏", ["pray", "hands", "thankful"]), ("🤗", ["hug", "kind", "thanks"]), ("❤️", ["heart", "appreciate", "grateful"])],
    "lonely": [("😔", ["pensive", "lonely", "alone"]), ("🥺", ["frown", "eyes", "abandoned"])],
}


def main():
    table = build_vectors()
    out = ROOT / "data" / "word_vectors_sample.txt"
    with out.open("w") as f:
        f.write(f"{len(table)} {DIM}\n")
        for w, v in table.items():
            f.write(w + " " + " ".join(f"{x:.6f}" for x in v) + "\n")
    emap = {e: [{"emoji": g, "keywords": k} for g, k in entries] for e, entries in EMOJI_MAP.items()}
    for entries in EMOJI_MAP.values():
        for _, kws in entries:
            for k in kws:
                assert k in table, k
    (ROOT / "config" / "emoji_map.default").write_text(json.dumps(emap, ensure_ascii=False, indent=2) + "\n")
    print(f"wrote {len(table)} vectors and {sum(map(len, EMOJI_MAP.values()))} emoji entries")


if __name__ == "__main__":
    main()
