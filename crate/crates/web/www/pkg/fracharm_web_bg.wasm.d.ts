/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_demo_free: (a: number, b: number) => void;
export const demo_edges: (a: number) => [number, number];
export const demo_eigenvalues: (a: number) => [number, number];
export const demo_harmonicInBall: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const demo_heatKernel: (a: number, b: number, c: number) => [number, number, number, number];
export const demo_nearestVertex: (a: number, b: number, c: number) => number;
export const demo_new: (a: number, b: number, c: number) => [number, number, number];
export const demo_positions: (a: number) => [number, number];
export const demo_vertexCount: (a: number) => number;
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __wbindgen_start: () => void;
