#!/usr/bin/env python3
"""Recount fixture statistics with plain line filters and rewrite manifest.json.

Usage: python3 fixtures/count_triples.py [fixtures/disgenet-mini.nt]
"""
import json
import os
import sys

RDF_TYPE = "<http://www.w3.org/1999/02/22-rdf-syntax-ns#type>"
GENE_CLASS = "<http://ncicb.nci.nih.gov/xml/owl/EVS/Thesaurus.owl#C16612>"
DISEASE_CLASS = "<http://ncicb.nci.nih.gov/xml/owl/EVS/Thesaurus.owl#C7057>"
GDA_LINK = "<http://semanticscience.org/resource/SIO_000628>"
EVIDENCE = "<http://semanticscience.org/resource/SIO_000772>"


def main():
    here = os.path.dirname(os.path.abspath(__file__))
    path = sys.argv[1] if len(sys.argv) > 1 else os.path.join(here, "disgenet-mini.nt")
    lines = set()
    with open(path, encoding="utf-8") as f:
        for raw in f:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            lines.add(line)
    fields = [l.split(" ", 2) for l in lines]
    genes = {s for s, p, o in fields if p == RDF_TYPE and o == GENE_CLASS + " ."}
    diseases = {s for s, p, o in fields if p == RDF_TYPE and o == DISEASE_CLASS + " ."}
    gdas = {s for s, p, o in fields if p == GDA_LINK}
    articles = sum(1 for s, p, o in fields if p == EVIDENCE)
    manifest = {
        "file": os.path.basename(path),
        "triples": len(lines),
        "genes": len(genes),
        "diseases": len(diseases),
        "associations": len(gdas),
        "evidenceLinks": articles,
    }
    with open(os.path.join(here, "manifest.json"), "w", encoding="utf-8") as f:
        json.dump(manifest, f, indent=2)
        f.write("\n")
    print(json.dumps(manifest))


if __name__ == "__main__":
    main()
