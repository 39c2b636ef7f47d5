"""FastAPI service wrapping the simulation workbench."""

from fastapi import FastAPI

from .routes import router


def create_app() -> FastAPI:
    app = FastAPI(
        title="restartfa",
        description="Exact and statistical simulation of quantum/probabilistic "
                    "finite automata with restart and reset moves",
        version="0.1.0",
    )
    app.include_router(router)
    return app


app = create_app()
