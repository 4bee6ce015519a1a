/* tslint:disable */
/* eslint-disable */

export class Demo {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Edge endpoints, flattened as i0, j0, i1, j1, ...
     */
    edges(): Uint32Array;
    /**
     * Eigenvalues of -L in increasing order.
     */
    eigenvalues(): Float64Array;
    /**
     * Solution of (-L)^s u = 0 in the ball B(x0, radius) with exterior
     * datum u = 1 on the vertices left of x = 1/3 and 0 elsewhere.
     */
    harmonicInBall(s: number, x0: number, radius: number): Float64Array;
    /**
     * Heat kernel p_t(x0, .) as a function of the second vertex.
     */
    heatKernel(t: number, x0: number): Float64Array;
    /**
     * Vertex nearest to the plane point (x, y); used to map clicks.
     */
    nearestVertex(x: number, y: number): number;
    /**
     * Builds the graph of `family` ("gasket", "vicsek", "interval") at `level`
     * and diagonalizes its generator.
     */
    constructor(family: string, level: number);
    /**
     * Vertex coordinates, flattened as x0, y0, x1, y1, ...
     */
    positions(): Float64Array;
    vertexCount(): number;
}

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_demo_free: (a: number, b: number) => void;
    readonly demo_edges: (a: number) => [number, number];
    readonly demo_eigenvalues: (a: number) => [number, number];
    readonly demo_harmonicInBall: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly demo_heatKernel: (a: number, b: number, c: number) => [number, number, number, number];
    readonly demo_nearestVertex: (a: number, b: number, c: number) => number;
    readonly demo_new: (a: number, b: number, c: number) => [number, number, number];
    readonly demo_positions: (a: number) => [number, number];
    readonly demo_vertexCount: (a: number) => number;
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
