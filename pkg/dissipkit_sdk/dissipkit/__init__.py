"""
dissipkit - 소산 변분 알고리즘을 위한 밀도 행렬 시뮬레이션 SDK

시스템 큐비트에 새 안실라를 붙여 매개변수화된 유니터리를 적용한 뒤
안실라를 리셋하는 소산 블록으로, 변분 양자 고유값 탐색(DVQE)과 잡음
상태 복원을 학습하는 패키지입니다. 모든 시뮬레이션은 정확한 밀도
행렬(complex128)로 수행됩니다.

주요 컴포넌트
-------------

1. **qmath / states / channels / circuits** (시뮬레이터)
   - 부분 대각합, 국소 연산자 적용, 에르미트 고유분해
   - DensityMatrix, PureState, 피델리티
   - Kraus 채널, Stinespring 팽창, 잡음 모델, 안실라 리셋
   - 매개변수 회로 블록 (VQE 층, 소산 블록)

2. **hamiltonian**
   - Pauli 문자열 해밀토니안, 벤치마크 스핀 모델 H1/H2/H3, 정확 대각화

3. **engine**
   - DVQE / 복원 설정, 순전파, 손실 함수

4. **optim / diagnostics**
   - 매개변수 이동 그래디언트, 고정 학습률 경사 하강
   - PL 비율, 하강 만족도, 초기 그래디언트 노름, 자원 스캔

5. **config / cli**
   - TOML 실험 설정과 결정적 CSV/JSON 출력

Package Structure
-----------------

```mermaid
graph TB
    subgraph "Simulator (시뮬레이터)"
    QM[qmath]
    ST[states]
    CH[channels]
    CI[circuits]
    HA[hamiltonian]
    end

    subgraph "Training (학습)"
    EN[engine]
    OP[optim]
    DI[diagnostics]
    end

    subgraph "Runner (실행기)"
    CF[config]
    CLI[cli]
    end

    ST --> QM
    CH --> ST
    CI --> CH
    HA --> ST
    EN --> CI
    EN --> HA
    DI --> EN
    DI --> OP
    CF --> EN
    CLI --> CF
    CLI --> DI

    style EN fill:#e1f5ff,stroke:#0066cc,stroke-width:3px
    style OP fill:#fff4e1,stroke:#ff9900,stroke-width:2px
    style CLI fill:#e1ffe1,stroke:#00cc00,stroke-width:2px
```

Quick Start
-----------

```python
from dissipkit import RecoveryConfig, make_loss, init_params, train, w_state

cfg = RecoveryConfig(target=w_state(3), m=3, rounds=3)
loss = make_loss("recovery", cfg)
trace = train(loss, init_params(loss.param_count, seed=1), learning_rate=0.8, iterations=100)
print(loss.initial_metric, trace.final_metric)
```

명령줄에서:

```bash
dissipkit run experiments/recovery_targets.toml
dissipkit eig experiments/heisenberg_3.txt
```
"""
from .channels import NoiseKind, NoiseLocation, NoiseSpec
from .circuits import ParamCircuit
from .diagnostics import descent_check, grad_norm_at_init, parameter_scan, pl_ratio, saturation_point
from .engine import DvqeConfig, LossFunction, RecoveryConfig, TaskKind, make_loss
from .hamiltonian import PauliHamiltonian, SpinModelSpec, build_spin_model, ground_energy, model_by_name
from .optim import init_params, gradient_param_shift, train, TrainingTrace
from .states import DensityMatrix, PureState, fidelity_pure, plus_state, w_state, dressed_cluster_state


__all__ = [
    'NoiseKind',
    'NoiseLocation',
    'NoiseSpec',
    'ParamCircuit',
    'descent_check',
    'grad_norm_at_init',
    'parameter_scan',
    'pl_ratio',
    'saturation_point',
    'DvqeConfig',
    'LossFunction',
    'RecoveryConfig',
    'TaskKind',
    'make_loss',
    'PauliHamiltonian',
    'SpinModelSpec',
    'build_spin_model',
    'ground_energy',
    'model_by_name',
    'init_params',
    'gradient_param_shift',
    'train',
    'TrainingTrace',
    'DensityMatrix',
    'PureState',
    'fidelity_pure',
    'plus_state',
    'w_state',
    'dressed_cluster_state',
]
