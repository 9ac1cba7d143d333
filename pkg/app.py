import json
import logging
from typing import Any, Dict, List, Optional

from fastapi import FastAPI, File, Form, HTTPException, UploadFile
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, ValidationError

from cng.errors import CngError
from cng.metrics import price_of_aggression, price_of_security
from cng.models import CngInstance, MasterObjective, SolveConfig, TrafficSnapshot
from utils.instance_io import InstanceStore, jsonable
from utils.settings import configure_logging, get_settings
from utils.snapshot_ingest import SnapshotIngestor
from workflow.graph import ZeroRegretsWorkflow

configure_logging()
logger = logging.getLogger(__name__)

# Initialize FastAPI app
app = FastAPI(
    title="Critical Node Game Solver",
    description="Selects the best (approximate) Nash equilibrium of defender-attacker Critical Node Games",
    version="1.0.0"
)

# Add CORS middleware
app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

# Create the workflow instance
workflow = ZeroRegretsWorkflow()


class SolveResponse(BaseModel):
    x: List[int]
    alpha: List[int]
    phi: float
    exact: bool
    defender_payoff: float
    attacker_payoff: float
    objective: str
    objective_value: float
    iterations: int
    cuts: int
    phi_ub: float
    wall_time_s: float
    status: str


async def _read_instance(upload: UploadFile) -> CngInstance:
    return InstanceStore.loads((await upload.read()).decode("utf-8"))


def _config(instance: CngInstance, objective: str, time_limit: Optional[float], phi_increment: float) -> SolveConfig:
    if time_limit is None:
        settings = get_settings()
        time_limit = settings.ingested_time_limit if instance.edges is not None else settings.time_limit
    return SolveConfig(objective=MasterObjective(objective), time_limit=time_limit, phi_increment=phi_increment)


@app.post("/api/solve", response_model=SolveResponse)
async def solve_instance(
    instance_file: UploadFile = File(...),
    objective: str = Form("defender"),
    time_limit: Optional[float] = Form(None),
    phi_increment: float = Form(1.0)
):
    """
    Select the equilibrium of an uploaded instance that maximizes the objective.

    Parameters:
    - instance_file: Instance JSON
    - objective: defender, attacker or social
    - time_limit: Seconds; the configured default when omitted
    - phi_increment: Step by which Phi_UB is relaxed

    Returns:
    - The result record
    """
    logger.info(f"Received solve request for {instance_file.filename} ({objective})")
    try:
        instance = await _read_instance(instance_file)
        result = workflow.solve(instance, _config(instance, objective, time_limit, phi_increment))
        logger.info(f"Solved {instance_file.filename}: {result.status.value}, phi={result.phi:.6g}")
        return result.to_record()
    except (CngError, ValidationError, ValueError) as e:
        logger.error(f"Rejected solve request: {str(e)}")
        raise HTTPException(status_code=400, detail=str(e))
    except Exception as e:
        logger.error(f"Error solving instance: {str(e)}")
        raise HTTPException(status_code=500, detail=f"Error solving instance: {str(e)}")


@app.post("/api/price")
async def price_instance(
    instance_file: UploadFile = File(...),
    time_limit: Optional[float] = Form(None)
) -> Dict[str, Any]:
    """Price of Security and Price of Aggression, each with the Phi level it was computed at."""
    try:
        instance = await _read_instance(instance_file)
        pos = price_of_security(instance, _config(instance, "defender", time_limit, 1.0))
        poa = price_of_aggression(instance, _config(instance, "attacker", time_limit, 1.0))
        return jsonable({"pos": pos.to_record(), "poa": poa.to_record()})
    except (CngError, ValidationError, ValueError) as e:
        logger.error(f"Rejected price request: {str(e)}")
        raise HTTPException(status_code=400, detail=str(e))
    except Exception as e:
        logger.error(f"Error computing prices: {str(e)}")
        raise HTTPException(status_code=500, detail=f"Error computing prices: {str(e)}")


@app.post("/api/ingest")
async def ingest_snapshot(
    snapshot_file: UploadFile = File(...),
    gamma: float = Form(0.0),
    eta: float = Form(0.6),
    defender_budget_frac: float = Form(0.30),
    attacker_budget_frac: float = Form(0.10)
) -> Dict[str, Any]:
    """Instance JSON derived from an uploaded traffic snapshot."""
    try:
        snapshot = TrafficSnapshot.model_validate(json.loads(await snapshot_file.read()))
        instance = SnapshotIngestor.ingest(
            snapshot,
            gamma=gamma,
            eta=eta,
            defender_budget_frac=defender_budget_frac,
            attacker_budget_frac=attacker_budget_frac,
        )
        return json.loads(InstanceStore.dumps(instance))
    except (CngError, ValidationError, ValueError) as e:
        logger.error(f"Rejected snapshot: {str(e)}")
        raise HTTPException(status_code=400, detail=str(e))
    except Exception as e:
        logger.error(f"Error ingesting snapshot: {str(e)}")
        raise HTTPException(status_code=500, detail=f"Error ingesting snapshot: {str(e)}")


@app.get("/api/health")
async def health_check():
    """Health check endpoint"""
    return {"status": "healthy"}


if __name__ == "__main__":
    import uvicorn
    uvicorn.run(app, host="0.0.0.0", port=8000)
