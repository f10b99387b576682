"""Function-word categories used by the style-matching metric.

The default table covers the nine classic function-word families. It is
embedded here so the package works offline, and can be exported or replaced
through a plain-text file with one ``category_name<TAB>word`` entry per line.
"""

from __future__ import annotations

from .errors import ParseError, ValidationError

DEFAULT_CATEGORIES: dict[str, tuple[str, ...]] = {
    "personal_pronouns": (
        "i", "me", "my", "mine", "myself",
        "we", "us", "our", "ours", "ourselves",
        "you", "your", "yours", "yourself", "yourselves",
        "he", "him", "his", "himself",
        "she", "her", "hers", "herself",
        "they", "them", "their", "theirs", "themselves",
    ),
    "impersonal_pronouns": (
        "it", "its", "itself", "this", "that", "these", "those",
        "something", "anything", "nothing", "everything",
        "somebody", "someone", "anybody", "anyone",
        "nobody", "everybody", "everyone",
        "one", "ones", "other", "others",
        "what", "which", "who", "whom", "whose",
    ),
    "articles": ("a", "an", "the"),
    "prepositions": (
        "in", "on", "at", "by", "for", "with", "about", "against",
        "between", "among", "into", "through", "during", "before", "after",
        "above", "below", "to", "from", "up", "down", "of", "off", "over",
        "under", "near", "until", "upon", "within", "without", "along",
        "across", "behind", "beyond", "via", "toward", "towards",
    ),
    "conjunctions": (
        "and", "but", "or", "nor", "so", "yet", "because", "although",
        "though", "while", "whereas", "unless", "if", "when", "whenever",
        "since", "as", "than", "whether", "once",
    ),
    "auxiliary_verbs": (
        "am", "is", "are", "was", "were", "be", "been", "being",
        "have", "has", "had", "having", "do", "does", "did", "doing",
        "will", "would", "shall", "should", "may", "might", "must",
        "can", "could", "ought",
        "isn't", "aren't", "wasn't", "weren't", "don't", "doesn't",
        "didn't", "won't", "wouldn't", "can't", "couldn't", "shouldn't",
    ),
    "negations": (
        "no", "not", "never", "none", "neither", "nowhere", "cannot",
    ),
    "quantifiers": (
        "all", "any", "both", "each", "every", "few", "fewer", "less",
        "little", "lots", "many", "more", "most", "much", "several",
        "some", "plenty", "half", "whole", "enough",
    ),
    "common_adverbs": (
        "very", "really", "just", "now", "then", "there", "here",
        "quite", "rather", "too", "also", "only", "even", "still",
        "again", "already", "soon", "often", "always", "sometimes",
        "usually", "almost", "maybe", "perhaps", "anyway",
    ),
}


def dump_categories(categories: dict[str, tuple[str, ...]] | None = None) -> str:
    """Render a category table in the plain-text interchange format."""
    categories = DEFAULT_CATEGORIES if categories is None else categories
    lines = []
    for name, words in categories.items():
        for word in words:
            lines.append(f"{name}\t{word}")
    return "\n".join(lines) + "\n"


def load_categories(text: str) -> dict[str, tuple[str, ...]]:
    """Parse a category table. Category order follows first appearance."""
    table: dict[str, list[str]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "\t" not in line:
            raise ParseError(f"line {lineno}: expected 'category<TAB>word'", line=lineno)
        name, word = line.split("\t", 1)
        name = name.strip()
        word = word.strip().lower()
        if not name or not word:
            raise ParseError(f"line {lineno}: empty category or word", line=lineno)
        bucket = table.setdefault(name, [])
        if word not in bucket:
            bucket.append(word)
    if not table:
        raise ValidationError("category table is empty")
    return {name: tuple(words) for name, words in table.items()}
