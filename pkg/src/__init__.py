__version__ = "0.3.0"
__app_name__ = "condcast"
__app_description__ = (
    "Условные прогнозы для структурных байесовских VAR: ленточный прецизионный "
    "сэмплер, ограничения-равенства, неравенства и структурные сценарии"
)
__app_author__ = "Artem G."

from src.core import RunContext, get_context, init_context

__all__ = [
    "RunContext",
    "__app_author__",
    "__app_description__",
    "__app_name__",
    "__version__",
    "get_context",
    "init_context",
]
