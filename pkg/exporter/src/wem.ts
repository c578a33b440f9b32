/**
 * WEM1 embedding store writer/reader (little-endian, bit-exact).
 *
 * Header: 4-byte magic "WEM1", u32 dim, u32 count, u8 normalized flag.
 * Records: u16 id length, UTF-8 id bytes, dim float32 values.
 */

export interface WemStore {
  dim: number
  normalized: boolean
  entries: Map<string, Float32Array>
}

const MAGIC = 'WEM1'
const HEADER_SIZE = 13

export function createStore(dim: number, normalized = false): WemStore {
  if (dim < 1) throw new Error('store dim must be >= 1')
  return { dim, normalized, entries: new Map() }
}

export function addEntry(store: WemStore, id: string, values: Float32Array | number[]): void {
  if (!id) throw new Error('embedding ids must be nonempty')
  if (store.entries.has(id)) throw new Error(`duplicate embedding id ${JSON.stringify(id)}`)
  const vec = values instanceof Float32Array ? values : Float32Array.from(values)
  if (vec.length !== store.dim) {
    throw new Error(`embedding ${JSON.stringify(id)} has dim ${vec.length}, store dim is ${store.dim}`)
  }
  store.entries.set(id, vec)
}

export function encodeStore(store: WemStore): Buffer {
  const chunks: Buffer[] = []
  const header = Buffer.alloc(HEADER_SIZE)
  header.write(MAGIC, 0, 'ascii')
  header.writeUInt32LE(store.dim, 4)
  header.writeUInt32LE(store.entries.size, 8)
  header.writeUInt8(store.normalized ? 1 : 0, 12)
  chunks.push(header)
  for (const [id, vec] of store.entries) {
    const idBytes = Buffer.from(id, 'utf-8')
    if (idBytes.length === 0 || idBytes.length > 0xffff) {
      throw new Error(`id ${JSON.stringify(id)} must be 1..65535 bytes`)
    }
    const record = Buffer.alloc(2 + idBytes.length + 4 * store.dim)
    record.writeUInt16LE(idBytes.length, 0)
    idBytes.copy(record, 2)
    for (let i = 0; i < store.dim; i++) {
      record.writeFloatLE(vec[i], 2 + idBytes.length + 4 * i)
    }
    chunks.push(record)
  }
  return Buffer.concat(chunks)
}

export function decodeStore(data: Buffer): WemStore {
  if (data.length < HEADER_SIZE) {
    throw new Error(`file shorter than the ${HEADER_SIZE}-byte header (byte offset ${data.length})`)
  }
  if (data.toString('ascii', 0, 4) !== MAGIC) {
    throw new Error('bad magic (byte offset 0)')
  }
  const dim = data.readUInt32LE(4)
  const count = data.readUInt32LE(8)
  const flag = data.readUInt8(12)
  if (dim < 1) throw new Error('dim field must be >= 1 (byte offset 4)')
  if (flag !== 0 && flag !== 1) throw new Error(`normalized flag must be 0 or 1, got ${flag} (byte offset 12)`)
  const store = createStore(dim, flag === 1)
  let offset = HEADER_SIZE
  for (let index = 0; index < count; index++) {
    if (offset + 2 > data.length) throw new Error(`record ${index} truncated (byte offset ${offset})`)
    const idLen = data.readUInt16LE(offset)
    offset += 2
    if (idLen === 0) throw new Error(`record ${index} has an empty id (byte offset ${offset - 2})`)
    if (offset + idLen > data.length) throw new Error(`record ${index} truncated inside its id (byte offset ${offset})`)
    const id = data.toString('utf-8', offset, offset + idLen)
    offset += idLen
    if (offset + 4 * dim > data.length) {
      throw new Error(`record ${index} truncated inside its values (byte offset ${offset})`)
    }
    const vec = new Float32Array(dim)
    for (let i = 0; i < dim; i++) vec[i] = data.readFloatLE(offset + 4 * i)
    offset += 4 * dim
    if (store.entries.has(id)) throw new Error(`duplicate id ${JSON.stringify(id)}`)
    store.entries.set(id, vec)
  }
  if (offset !== data.length) {
    throw new Error(`${data.length - offset} trailing bytes after last record (byte offset ${offset})`)
  }
  return store
}
