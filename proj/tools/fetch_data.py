#!/usr/bin/env python3
"""Download the public-domain English corpus and WordSim-353 used by the acceptance suite.

Writes into the data directory (default: <repo>/data):
  corpus_en.txt   KJV (1769) + World English Bible, one verse per line, lowercase letter runs
  wordsim353.tsv  WordSim-353 combined set, as shipped in the gensim test data

Sources come from the npm and PyPI registries, so whatever mirror npm and pip
are configured for is used.
"""

import argparse
import hashlib
import json
import pathlib
import re
import subprocess
import sys
import tarfile
import tempfile
import zipfile

KJV = "kjv@1.0.0"
WEB = "world-english-bible@1.0.1"
GENSIM = "gensim==4.4.0"
WORDSIM_MEMBER = "gensim/test/test_data/wordsim353.tsv"

POSSESSIVE = re.compile(r"['’]s\b")
WORD = re.compile(r"[a-z]+")


def normalize(text):
    text = POSSESSIVE.sub("", text.lower())
    return " ".join(WORD.findall(text))


def npm_pack(spec, dest):
    out = subprocess.run(["npm", "pack", spec, "--pack-destination", str(dest), "--silent"],
                         check=True, capture_output=True, text=True)
    return dest / out.stdout.strip().splitlines()[-1]


def read_tar_json(tgz, predicate):
    with tarfile.open(tgz) as tar:
        for member in sorted(tar.getmembers(), key=lambda m: m.name):
            if member.isfile() and predicate(member.name):
                yield member.name, json.load(tar.extractfile(member))


def kjv_verses(tgz):
    for _, verses in read_tar_json(tgz, lambda n: n.endswith("verses-1769.json")):
        for text in verses.values():
            yield text.replace("[", "").replace("]", "")


def web_verses(tgz):
    for _, items in read_tar_json(tgz, lambda n: "/json/" in n and n.endswith(".json")):
        for item in items:
            if item.get("type") in ("paragraph text", "line text") and "value" in item:
                yield item["value"]


def fetch_wordsim(dest):
    subprocess.run([sys.executable, "-m", "pip", "download", GENSIM, "--no-deps", "--only-binary=:all:",
                    "-d", str(dest), "-q"], check=True)
    wheel = next(dest.glob("gensim-*.whl"))
    with zipfile.ZipFile(wheel) as z:
        return z.read(WORDSIM_MEMBER)


def sha256(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


def main():
    root = pathlib.Path(__file__).resolve().parent.parent
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--out", type=pathlib.Path, default=root / "data", help="data directory")
    parser.add_argument("--force", action="store_true", help="re-download existing files")
    args = parser.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    corpus = args.out / "corpus_en.txt"
    wordsim = args.out / "wordsim353.tsv"

    with tempfile.TemporaryDirectory() as tmp:
        tmp = pathlib.Path(tmp)
        if args.force or not corpus.exists():
            lines = []
            for verses in (kjv_verses(npm_pack(KJV, tmp)), web_verses(npm_pack(WEB, tmp))):
                lines.extend(line for line in map(normalize, verses) if line)
            corpus.write_text("\n".join(lines) + "\n", encoding="utf-8")
        if args.force or not wordsim.exists():
            wordsim.write_bytes(fetch_wordsim(tmp))

    for path in (corpus, wordsim):
        print(f"{path}\t{path.stat().st_size}\t{sha256(path)}")


if __name__ == "__main__":
    main()
