"""Synthetic sequence generators and text-corpus ingestion.

The second synthetic dataset comes from a small probabilistic automaton whose
published diagram is only approximately recoverable, so the module ships a
best-effort reconstruction (three-state chains per emission group, the
documented 0.8 / 0.84 transition weights, uniform thirds for emissions) and a
line-oriented config format so callers can substitute their own automaton.
"""

import string

EOS = "eos"
UNK = "unk"

SEQUENCE1_PATTERN = "ABCDBCDE"
SEQUENCE1_LENGTH = 500
SEQUENCE2_LENGTH = 2500


class EmptyCorpusError(ValueError):
    """No usable tokens survived preprocessing."""


class PfaFormatError(ValueError):
    """An automaton config line could not be parsed."""


def sequence1(length=SEQUENCE1_LENGTH):
    """Deterministic period-eight cycle over five symbols.

    Returns ``(symbols, hidden)`` with hidden state ``t mod 8`` and the fixed
    emission pattern A-B-C-D-B-C-D-E encoded as integers 0..4.
    """
    if length < 1:
        raise ValueError("length must be positive")
    alphabet = sorted(set(SEQUENCE1_PATTERN))
    emission = [alphabet.index(c) for c in SEQUENCE1_PATTERN]
    hidden = [t % 8 for t in range(length)]
    symbols = [emission[h] for h in hidden]
    return symbols, hidden


class Pfa:
    """Probabilistic automaton with per-state transition and emission tables."""

    def __init__(self, transitions, emissions):
        self.transitions = {s: list(v) for s, v in transitions.items()}
        self.emissions = {s: list(v) for s, v in emissions.items()}
        states = set(self.transitions) | set(self.emissions)
        self.n_states = len(states)
        if states != set(range(self.n_states)):
            raise PfaFormatError("states must be 0..n-1 without gaps")
        self.n_symbols = 1 + max(sym for rows in self.emissions.values()
                                 for sym, _ in rows)
        self.validate()

    def validate(self):
        for s in range(self.n_states):
            for table, name in ((self.transitions, "transition"),
                                (self.emissions, "emission")):
                rows = table.get(s)
                if not rows:
                    raise PfaFormatError("state %d has no %s rows" % (s, name))
                total = sum(p for _, p in rows)
                if abs(total - 1.0) > 1e-9:
                    raise PfaFormatError(
                        "state %d %s probabilities sum to %r" % (s, name, total))
                if any(p < 0 for _, p in rows):
                    raise PfaFormatError("negative probability at state %d" % s)

    def simulate(self, length, rng):
        """Run the automaton from state 0; returns ``(symbols, hidden)``."""
        symbols = []
        hidden = []
        state = 0
        for _ in range(length):
            hidden.append(state)
            symbols.append(_pick_weighted(self.emissions[state], rng))
            state = _pick_weighted(self.transitions[state], rng)
        return symbols, hidden


def _pick_weighted(rows, rng):
    u = rng.random()
    acc = 0.0
    for value, p in rows:
        acc += p
        if u < acc:
            return value
    return rows[-1][0]


def default_pfa(groups=4, chain=3, n_symbols=8):
    """Best-effort reconstruction of the published automaton.

    ``groups`` emission groups of ``chain`` states each form one long noisy
    cycle: within a group the chain advances with probability 0.84 (else
    skipping to the next group), and the final chain state moves to the next
    group with probability 0.8 (else skipping one group further).  All states
    of a group emit one of the same three symbols with probability 1/3, and
    the three-symbol windows of neighbouring groups overlap, so single
    observations rarely identify the state and the hidden phase has to be
    carried through time.
    """
    transitions = {}
    emissions = {}
    for g in range(groups):
        for i in range(chain):
            s = g * chain + i
            nxt = ((g + 1) % groups) * chain
            skip = ((g + 2) % groups) * chain
            if i < chain - 1:
                transitions[s] = [(s + 1, 0.84), (nxt, 0.16)]
            else:
                transitions[s] = [(nxt, 0.8), (skip, 0.2)]
            emissions[s] = [((2 * g + d) % n_symbols, 1 / 3) for d in range(3)]
    return Pfa(transitions, emissions)


def load_pfa(path):
    with open(path, "r", encoding="utf-8") as fp:
        return parse_pfa(fp)


def parse_pfa(fp):
    """Parse ``trans <from> <to> <p>`` / ``emit <state> <symbol> <p>`` lines."""
    transitions = {}
    emissions = {}
    for lineno, line in enumerate(fp, 1):
        parts = line.split()
        if not parts or parts[0].startswith("#"):
            continue
        if parts[0] == "trans" and len(parts) == 4:
            transitions.setdefault(int(parts[1]), []).append(
                (int(parts[2]), float(parts[3])))
        elif parts[0] == "emit" and len(parts) == 4:
            emissions.setdefault(int(parts[1]), []).append(
                (int(parts[2]), float(parts[3])))
        else:
            raise PfaFormatError("line %d: cannot parse %r" % (lineno, line))
    if not transitions:
        raise PfaFormatError("no transition lines found")
    return Pfa(transitions, emissions)


def save_pfa(pfa, path):
    with open(path, "w", encoding="utf-8") as fp:
        fp.write("# probabilistic automaton: trans <from> <to> <p> / "
                 "emit <state> <symbol> <p>\n")
        for s in range(pfa.n_states):
            for nxt, p in pfa.transitions[s]:
                fp.write("trans %d %d %r\n" % (s, nxt, p))
        for s in range(pfa.n_states):
            for sym, p in pfa.emissions[s]:
                fp.write("emit %d %d %r\n" % (s, sym, p))


# ----------------------------------------------------------------------
# text corpora

class Corpus:
    """Integer-coded train/test token streams with their vocabulary."""

    def __init__(self, train, test, words):
        self.train = train
        self.test = test
        self.words = list(words)
        self.vocab = {w: i for i, w in enumerate(self.words)}

    @property
    def n_symbols(self):
        return len(self.words)

    def decode(self, ids):
        return [self.words[i] for i in ids]

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fp:
            fp.write("corpus %d %d %d\n"
                     % (len(self.words), len(self.train), len(self.test)))
            for w in self.words:
                fp.write("word %s\n" % w)
            fp.write("train %s\n" % " ".join(map(str, self.train)))
            fp.write("test %s\n" % " ".join(map(str, self.test)))

    @classmethod
    def load(cls, path):
        with open(path, "r", encoding="utf-8") as fp:
            header = fp.readline().split()
            if header[:1] != ["corpus"]:
                raise EmptyCorpusError("not a corpus file")
            words = []
            train = []
            test = []
            for line in fp:
                parts = line.split()
                if not parts:
                    continue
                if parts[0] == "word":
                    words.append(parts[1] if len(parts) > 1 else "")
                elif parts[0] == "train":
                    train = [int(v) for v in parts[1:]]
                elif parts[0] == "test":
                    test = [int(v) for v in parts[1:]]
        return cls(train, test, words)


_SENTENCE_ENDS = frozenset(".!?")
_PUNCT_TABLE = str.maketrans("", "", string.punctuation)


def tokenize(text):
    """Lowercase, sentence-aware tokenizer.

    Splits sentences on ``. ! ?``, appends the EOS token after every detected
    boundary, then strips all punctuation characters from the words
    themselves; trailing text without a terminator gets no EOS.
    """
    tokens = []
    sentence = []
    word = []

    def flush_word():
        if word:
            cleaned = "".join(word).translate(_PUNCT_TABLE)
            if cleaned:
                sentence.append(cleaned)
            del word[:]

    def flush_sentence(terminated):
        flush_word()
        if sentence:
            tokens.extend(sentence)
            if terminated:
                tokens.append(EOS)
            del sentence[:]

    for ch in text.lower():
        if ch in _SENTENCE_ENDS:
            flush_sentence(True)
        elif ch.isspace():
            flush_word()
        else:
            word.append(ch)
    flush_sentence(False)
    return tokens


def ingest_text(text, test_tail=1000):
    """Build a :class:`Corpus` from raw text.

    The last ``test_tail`` tokens are held out first; words seen exactly once
    in the remaining training stream become UNK, and so do test-only words.
    The vocabulary lists words in order of first appearance in the processed
    training stream.
    """
    tokens = tokenize(text)
    if not tokens:
        raise EmptyCorpusError("no tokens after preprocessing")
    if test_tail < 0 or test_tail >= len(tokens):
        raise EmptyCorpusError(
            "test tail of %d leaves no training tokens" % test_tail)
    split = len(tokens) - test_tail
    train_words = tokens[:split]
    test_words = tokens[split:]
    counts = {}
    for w in train_words:
        counts[w] = counts.get(w, 0) + 1
    counts[EOS] = counts.get(EOS, 0) + 2  # structural token, never a hapax
    train_words = [UNK if counts[w] == 1 else w for w in train_words]
    words = []
    vocab = {}
    train = []
    for w in train_words:
        idx = vocab.get(w)
        if idx is None:
            idx = len(words)
            vocab[w] = idx
            words.append(w)
        train.append(idx)
    if UNK not in vocab:
        vocab[UNK] = len(words)
        words.append(UNK)
    unk_id = vocab[UNK]
    test = [vocab.get(w, unk_id) for w in test_words]
    return Corpus(train, test, words)
