"""Exception hierarchy shared by every qsurvey module."""


class QSurveyError(ValueError):
    """Base class; subclasses ``ValueError`` so callers can catch either."""


class DimensionError(QSurveyError):
    pass


class KindError(QSurveyError):
    """An operator does not have the certified kind (hermitian/unitary) an operation needs."""


class RepresentationError(QSurveyError):
    pass


class QuadratureError(QSurveyError):
    pass


class CutoffError(QSurveyError):
    def __init__(self, message, minimal_n_max=None):
        super().__init__(message)
        self.minimal_n_max = minimal_n_max


class CoverageError(QSurveyError):
    pass


class ParameterError(QSurveyError):
    pass
