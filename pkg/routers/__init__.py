from routers.experiment_routes import router as experiment_router

__all__ = ["experiment_router"]
