"""Licensed under The MIT License (MIT) - Copyright (c) 2023-present the gumbel-phcs authors. See LICENSE"""

from .cli import main

raise SystemExit(main())
