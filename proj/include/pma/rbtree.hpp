#ifndef PMA_RBTREE_HPP
#define PMA_RBTREE_HPP

#include <cstddef>
#include <cstdint>
#include <new>
#include <vector>

#include "pma/block_pool.hpp"
#include "pma/errors.hpp"

namespace pma {

namespace detail {

struct RbNode {
    std::uint64_t key;
    RbNode* left;
    RbNode* right;
    RbNode* parent;
    bool red;
};

} // namespace detail

constexpr std::size_t rb_node_bytes() { return sizeof(detail::RbNode); }

// Node storage backed by the host allocator, one allocation per node.
class HeapNodeAllocator {
public:
    HeapNodeAllocator() = default;
    HeapNodeAllocator(const HeapNodeAllocator&) = delete;
    HeapNodeAllocator& operator=(const HeapNodeAllocator&) = delete;
    ~HeapNodeAllocator() {
        for (void* p : owned_) ::operator delete(p);
    }

    void* allocate(std::size_t bytes) {
        void* p = ::operator new(bytes);
        owned_.push_back(p);
        return p;
    }

    std::uint64_t allocation_count() const { return owned_.size(); }

private:
    std::vector<void*> owned_;
};

// Node storage bump-carved out of pool blocks; nodes are never freed
// individually, the blocks go back to the pool when the allocator dies.
class PoolNodeAllocator {
public:
    explicit PoolNodeAllocator(BlockPool& pool) : pool_(&pool) {}
    PoolNodeAllocator(const PoolNodeAllocator&) = delete;
    PoolNodeAllocator& operator=(const PoolNodeAllocator&) = delete;
    ~PoolNodeAllocator() {
        for (auto it = blocks_.rbegin(); it != blocks_.rend(); ++it) {
            pool_->release(*it);
        }
    }

    void* allocate(std::size_t bytes) {
        bytes = (bytes + 7) & ~std::size_t{7};
        if (cursor_ + bytes > pool_->block_size()) {
            const BlockHandle h = pool_->acquire();
            blocks_.push_back(h);
            data_ = pool_->span(h).data();
            cursor_ = 0;
        }
        void* p = data_ + cursor_;
        cursor_ += bytes;
        ++count_;
        return p;
    }

    std::uint64_t allocation_count() const { return count_; }
    std::uint64_t blocks_used() const { return blocks_.size(); }

private:
    BlockPool* pool_;
    std::vector<BlockHandle> blocks_;
    std::byte* data_ = nullptr;
    std::size_t cursor_ = std::size_t(-1); // forces a block on first allocate
    std::uint64_t count_ = 0;
};

// Classic red-black tree over 64-bit keys, multiset semantics (duplicates go
// right). The allocator parameter is the whole point: the same structure runs
// on host malloc or on pool blocks, so benchmarks compare allocation backing
// and nothing else.
template <class Alloc>
class RbTree {
    using Node = detail::RbNode;

public:
    explicit RbTree(Alloc& alloc) : alloc_(&alloc) {}

    std::size_t size() const { return size_; }

    void insert(std::uint64_t key) {
        Node* z = new (alloc_->allocate(sizeof(Node)))
            Node{key, nullptr, nullptr, nullptr, true};
        Node* parent = nullptr;
        Node* cur = root_;
        while (cur != nullptr) {
            parent = cur;
            cur = (key < cur->key) ? cur->left : cur->right;
        }
        z->parent = parent;
        if (parent == nullptr) {
            root_ = z;
        } else if (key < parent->key) {
            parent->left = z;
        } else {
            parent->right = z;
        }
        ++size_;
        insert_fixup(z);
    }

    // In-order visit via parent-pointer successor steps; no recursion, no
    // allocation, and the access pattern is as cache-hostile as the inserts.
    template <class F>
    void for_each_in_order(F&& f) const {
        const Node* n = root_;
        if (n == nullptr) return;
        while (n->left != nullptr) n = n->left;
        while (n != nullptr) {
            f(n->key);
            if (n->right != nullptr) {
                n = n->right;
                while (n->left != nullptr) n = n->left;
            } else {
                const Node* p = n->parent;
                while (p != nullptr && n == p->right) {
                    n = p;
                    p = p->parent;
                }
                n = p;
            }
        }
    }

    // Structural check: no red node with a red child, equal black height on
    // every path, consistent parent links, black root, sorted in-order walk.
    // Returns the tree's black height; throws Error on any violation.
    int validate() const {
        if (root_ != nullptr && root_->red) throw Error("red root");
        bool first = true;
        std::uint64_t prev = 0;
        for_each_in_order([&](std::uint64_t k) {
            if (!first && k < prev) throw Error("in-order walk not sorted");
            prev = k;
            first = false;
        });
        return check(root_, nullptr);
    }

private:
    static int check(const Node* n, const Node* parent) {
        if (n == nullptr) return 1;
        if (n->parent != parent) throw Error("bad parent link");
        if (n->red && ((n->left && n->left->red) || (n->right && n->right->red))) {
            throw Error("red node with red child");
        }
        const int lh = check(n->left, n);
        const int rh = check(n->right, n);
        if (lh != rh) throw Error("unequal black heights");
        return lh + (n->red ? 0 : 1);
    }

    void rotate_left(Node* x) {
        Node* y = x->right;
        x->right = y->left;
        if (y->left != nullptr) y->left->parent = x;
        y->parent = x->parent;
        if (x->parent == nullptr) {
            root_ = y;
        } else if (x == x->parent->left) {
            x->parent->left = y;
        } else {
            x->parent->right = y;
        }
        y->left = x;
        x->parent = y;
    }

    void rotate_right(Node* x) {
        Node* y = x->left;
        x->left = y->right;
        if (y->right != nullptr) y->right->parent = x;
        y->parent = x->parent;
        if (x->parent == nullptr) {
            root_ = y;
        } else if (x == x->parent->right) {
            x->parent->right = y;
        } else {
            x->parent->left = y;
        }
        y->right = x;
        x->parent = y;
    }

    void insert_fixup(Node* z) {
        while (z->parent != nullptr && z->parent->red) {
            Node* gp = z->parent->parent;
            if (z->parent == gp->left) {
                Node* uncle = gp->right;
                if (uncle != nullptr && uncle->red) {
                    z->parent->red = false;
                    uncle->red = false;
                    gp->red = true;
                    z = gp;
                } else {
                    if (z == z->parent->right) {
                        z = z->parent;
                        rotate_left(z);
                    }
                    z->parent->red = false;
                    gp->red = true;
                    rotate_right(gp);
                }
            } else {
                Node* uncle = gp->left;
                if (uncle != nullptr && uncle->red) {
                    z->parent->red = false;
                    uncle->red = false;
                    gp->red = true;
                    z = gp;
                } else {
                    if (z == z->parent->left) {
                        z = z->parent;
                        rotate_right(z);
                    }
                    z->parent->red = false;
                    gp->red = true;
                    rotate_left(gp);
                }
            }
        }
        root_->red = false;
    }

    Node* root_ = nullptr;
    std::size_t size_ = 0;
    Alloc* alloc_;
};

} // namespace pma

#endif
