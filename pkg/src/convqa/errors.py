"""Exception types shared across the toolkit."""


class ConvqaError(Exception):
    """Base class for all toolkit errors."""


class MalformedInput(ConvqaError):
    def __init__(self, message: str, offset: int | None = None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)


class DanglingReference(ConvqaError):
    """A relation endpoint does not resolve to an object in the graph."""


class EmptyGraph(ConvqaError):
    """A scene graph record contains no objects."""


class SelfAntonym(ConvqaError):
    """A lexicon phrase lists itself as its own antonym."""


class DuplicateKey(ConvqaError):
    """A lexicon key appears more than once."""


class UnknownCategory(ConvqaError):
    """A hypernym value is not in the lexicon's declared category set."""


class InvalidRatios(ConvqaError):
    """Split ratios are not positive or do not sum to 1."""


class DuplicatePrediction(ConvqaError):
    """Two predictions target the same (set_id, qa_index)."""


class UnknownSet(ConvqaError):
    """A prediction references a set or qa_index that does not exist."""


class MissingPrediction(ConvqaError):
    """A gold question has no prediction (only under the Error policy)."""


class UnknownTarget(ConvqaError):
    """A verdict references a (set_id, qa_index) that does not exist."""


class MalformedVerdict(ConvqaError):
    """A verdict is structurally invalid."""


class NoWorkRemaining(ConvqaError):
    """The reviewer has no assignable sets left."""


class UnknownImage(ConvqaError):
    """An answerer was asked about an image it has no graph for."""
