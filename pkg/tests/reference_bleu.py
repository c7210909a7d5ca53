"""Independent reference BLEU used only as a test oracle.

Deliberately written as a direct transcription of the textbook formula
(clipped n-gram precisions combined as a geometric mean, times a brevity
penalty), structured differently from the library implementation so the two
can cross-check each other:

- precisions are collected into a list and multiplied, not log-summed
- counting uses collections.Counter intersection

Conventions shared with the library (these are the definition under test):
up to 4-grams with uniform weights; an order the candidate is too short to
form contributes a neutral factor; zero matched unigrams scores 0; zero
matches at a higher order smooths to 1/(possible+1); the empty candidate
scores 0; the empty reference is an error.
"""

from collections import Counter


def ngrams(tokens, n):
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def reference_bleu(candidate, reference, max_order=4):
    if len(reference) == 0:
        raise ValueError("empty reference")
    if len(candidate) == 0:
        return 0.0
    precisions = []
    for n in range(1, max_order + 1):
        possible = len(candidate) - n + 1
        if possible <= 0:
            precisions.append(1.0)
            continue
        overlap = ngrams(candidate, n) & ngrams(reference, n)
        matched = sum(overlap.values())
        if matched == 0 and n == 1:
            return 0.0
        if matched == 0:
            precisions.append(1.0 / (possible + 1))
        else:
            precisions.append(matched / possible)
    geo_mean = 1.0
    for p in precisions:
        geo_mean *= p ** (1.0 / max_order)
    if len(candidate) > len(reference):
        brevity = 1.0
    else:
        import math

        brevity = math.exp(1.0 - len(reference) / len(candidate))
    return brevity * geo_mean
